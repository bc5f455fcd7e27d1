"""Single-document JSON configuration for the command-line workflows.

One config file carries the constraints, the labeler and model wiring,
the intervention policy, seeds, and IO settings, so every run is
reproducible from the file plus the command line seed.
"""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path

from .intervention import InterventionPolicy, PolicyError
from .ltl import Formula, ParseError, parse
from .models import EndpointLabeler, EndpointModel, RuleLabeler, ScriptedModel
from .synthbench import AttributeEventLabeler
from .trace import LabelingFunction


class ConfigError(ValueError):
    """Invalid configuration document."""


@dataclass
class Config:
    constraints: dict[str, Formula]
    glosses: dict[str, str]
    labeler_spec: Mapping | None
    model_spec: Mapping | None
    substitute_spec: Mapping | None
    policy: InterventionPolicy
    mode: str = "reset"
    seed: int = 0
    initial_input: str = ""
    stop_token: str = "DONE"
    action_temperature: float = 0.2
    sampling_temperature: float = 0.8
    raw: Mapping = field(default_factory=dict)

    def rules_text(self) -> str | None:
        if not self.glosses:
            return None
        return "\n".join(f"- {self.glosses[cid]}" for cid in sorted(self.glosses))


def load_config(path: str | Path) -> Config:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}") from err
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(raw, Mapping):
        raise ConfigError("config must be a JSON object")

    entries = raw.get("constraints")
    if not entries or not isinstance(entries, list):
        raise ConfigError("config needs a nonempty 'constraints' array")
    constraints: dict[str, Formula] = {}
    glosses: dict[str, str] = {}
    for i, entry in enumerate(entries):
        if not isinstance(entry, Mapping) or "id" not in entry or "formula" not in entry:
            raise ConfigError(f"constraint #{i + 1} needs 'id' and 'formula' fields")
        cid = entry["id"]
        if cid in constraints:
            raise ConfigError(f"duplicate constraint id {cid!r}")
        try:
            constraints[cid] = parse(entry["formula"])
        except ParseError as err:
            raise ConfigError(f"constraint {cid!r}: {err}") from err
        if entry.get("gloss"):
            glosses[cid] = entry["gloss"]

    policy_raw = dict(raw.get("policy", {}))
    template_path = policy_raw.pop("template_path", None)
    substitute_spec = policy_raw.pop("substitute_model", None) or raw.get("substitute_model")
    if template_path:
        try:
            policy_raw["inject_template"] = Path(template_path).read_text(encoding="utf-8")
        except OSError as err:
            raise ConfigError(f"cannot read inject template: {err}") from err
    try:
        policy = InterventionPolicy(**policy_raw)
    except (PolicyError, TypeError) as err:
        raise ConfigError(f"invalid policy: {err}") from err

    mode = raw.get("mode", "reset")
    if mode not in ("plain", "reset"):
        raise ConfigError(f"mode must be 'plain' or 'reset', got {mode!r}")

    return Config(
        constraints=constraints,
        glosses=glosses,
        labeler_spec=raw.get("labeler"),
        model_spec=raw.get("model"),
        substitute_spec=substitute_spec,
        policy=policy,
        mode=mode,
        seed=int(raw.get("seed", 0)),
        initial_input=raw.get("initial_input", ""),
        stop_token=raw.get("stop_token", "DONE"),
        action_temperature=float(raw.get("action_temperature", 0.2)),
        sampling_temperature=float(raw.get("sampling_temperature", 0.8)),
        raw=raw,
    )


def build_model(spec: Mapping | None) -> ScriptedModel | EndpointModel:
    if not spec:
        raise ConfigError("missing model specification")
    kind = spec.get("type")
    if kind == "scripted":
        if "outputs" in spec:
            return ScriptedModel(
                outputs=tuple(spec["outputs"]),
                stop_token=spec.get("stop_token", "DONE"),
            )
        if "distributions" in spec:
            distributions = tuple(
                tuple((str(text), float(weight)) for text, weight in dist)
                for dist in spec["distributions"]
            )
            return ScriptedModel(
                distributions=distributions, stop_token=spec.get("stop_token", "DONE")
            )
        raise ConfigError("scripted model needs 'outputs' or 'distributions'")
    if kind == "endpoint":
        try:
            return EndpointModel(
                base_url=spec["base_url"],
                model=spec["model"],
                api_key_env=spec.get("api_key_env", "LTLGUARD_API_KEY"),
                system_prompt=spec.get("system_prompt"),
                max_tokens=spec.get("max_tokens"),
                timeout=float(spec.get("timeout", 60.0)),
                retries=int(spec.get("retries", 3)),
                backoff=float(spec.get("backoff", 1.0)),
                audit_log_path=spec.get("audit_log_path"),
            )
        except KeyError as err:
            raise ConfigError(f"endpoint model spec missing {err}") from err
    raise ConfigError(f"unknown model type {kind!r}")


EMBEDDED = "embedded"


def build_labeler(spec: Mapping | None) -> LabelingFunction | str:
    """Build the configured labeler; the string ``embedded`` means the
    trace's own ground-truth labels are used."""
    if spec is None or spec.get("type") == "embedded":
        return EMBEDDED
    kind = spec.get("type")
    if kind == "rule":
        try:
            return RuleLabeler(
                vocabulary=frozenset(spec["vocabulary"]),
                rules=dict(spec["rules"]),
            )
        except KeyError as err:
            raise ConfigError(f"rule labeler spec missing {err}") from err
        except ValueError as err:
            raise ConfigError(str(err)) from err
    if kind == "event":
        return AttributeEventLabeler(
            entities=int(spec.get("entities", 1)),
            tagged=spec.get("tagged"),
        )
    if kind == "endpoint":
        try:
            endpoint = build_model({"type": "endpoint", **spec["endpoint"]})
        except KeyError as err:
            raise ConfigError(f"endpoint labeler spec missing {err}") from err
        return EndpointLabeler(
            endpoint=endpoint,
            vocabulary=frozenset(spec["vocabulary"]),
            temperature=float(spec.get("temperature", 0.0)),
            max_context_chars=int(spec.get("max_context_chars", 8000)),
        )
    raise ConfigError(f"unknown labeler type {kind!r}")
