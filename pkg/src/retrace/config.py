"""Run configuration: one TOML document describing a whole case.

The document names the crime scene, the footprint sources, and the knobs of
every processing step.  All relative paths are resolved against the config
file's directory, so a case folder is self-contained and relocatable.
Omitted sections fall back to the built-in defaults (default mapping rules,
the session-attribution inference rule, default correlation weights).
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .correlation import CorrelationConfig, ExpertRule, PairCondition, TemporalMode
from .errors import InputError
from .extract import ExtractorRegistry, FieldSpec, SourceDescriptor, SourceFormat
from .inference import BUILTIN_RULES, DEFAULT_RULES as DEFAULT_INFERENCE_RULES, InferenceRule, MAX_ROUNDS
from .kb import AttributeCondition, CrimeSceneConfig, DigitalScene, IllicitPattern
from .mapping import DEFAULT_RULES as DEFAULT_MAPPING_RULES, MappingRule
from .timeline import RenderFormat

DEFAULT_FORMATS = (RenderFormat.TEXT, RenderFormat.JSON, RenderFormat.DOT)


@dataclass(frozen=True)
class RunConfig:
    scene: CrimeSceneConfig
    sources: tuple[SourceDescriptor, ...] = ()
    registry: ExtractorRegistry = field(default_factory=ExtractorRegistry)
    mapping_rules: tuple[MappingRule, ...] = DEFAULT_MAPPING_RULES
    inference_rules: tuple[InferenceRule, ...] = DEFAULT_INFERENCE_RULES
    max_rounds: int = MAX_ROUNDS
    correlation: CorrelationConfig = field(default_factory=CorrelationConfig)
    expert_rules: tuple[ExpertRule, ...] = ()
    output_dir: str = "out"
    formats: tuple[RenderFormat, ...] = DEFAULT_FORMATS

    def with_sources(self, paths: list[str]) -> "RunConfig":
        """Narrow the source list to the given paths (exact or absolute match)."""
        keep = []
        for wanted in paths:
            matches = [
                s
                for s in self.sources
                if s.path == wanted or os.path.abspath(s.path) == os.path.abspath(wanted)
            ]
            if not matches:
                raise InputError(f"--sources path {wanted!r} is not a configured source")
            keep.extend(matches)
        seen = set()
        unique = []
        for s in keep:
            if s.path not in seen:
                seen.add(s.path)
                unique.append(s)
        return replace(self, sources=tuple(unique))


def _as_table(data, key: str, where: str) -> Mapping:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise InputError(f"{where}: [{key}] must be a table")
    return value


def _as_list(data, key: str, where: str) -> list:
    value = data.get(key, [])
    if not isinstance(value, list):
        raise InputError(f"{where}: {key} must be an array")
    return value


def _scene_from_toml(data: Mapping, base: str, where: str) -> CrimeSceneConfig:
    scene_data = _as_table(data, "scene", where)
    digital = []
    for entry in _as_list(scene_data, "digital", where):
        digital.append(
            DigitalScene(
                machine_id=entry["machine_id"],
                source_paths=tuple(
                    os.path.join(base, p) for p in entry.get("source_paths", ())
                ),
            )
        )
    if not digital:
        raise InputError(f"{where}: a run needs at least one [[scene.digital]] entry")
    catalog = []
    for entry in _as_list(data, "illicit", where):
        conditions = tuple(
            AttributeCondition(
                entity=c.get("entity", "object"),
                attribute=c["attribute"],
                values=tuple(str(v) for v in c["values"]),
            )
            for c in entry.get("conditions", ())
        )
        if not conditions:
            raise InputError(f"{where}: illicit pattern {entry.get('name')!r} has no conditions")
        catalog.append(IllicitPattern(infraction_name=entry["name"], conditions=conditions))
    return CrimeSceneConfig(
        physical_scenes=tuple(scene_data.get("physical", ())),
        digital_scenes=tuple(digital),
        illicit_catalog=tuple(catalog),
    )


def _sources_from_toml(data: Mapping, base: str, where: str) -> tuple[SourceDescriptor, ...]:
    out = []
    for entry in _as_list(data, "sources", where):
        fmt_name = entry.get("format", "facttext")
        try:
            fmt = SourceFormat(fmt_name)
        except ValueError:
            raise InputError(f"{where}: unknown source format {fmt_name!r}") from None
        out.append(
            SourceDescriptor(
                path=os.path.join(base, entry["path"]),
                format=fmt,
                kind_hint=entry.get("kind_hint"),
                kinds=tuple(entry.get("kinds", ())),
            )
        )
    return tuple(out)


def _registry_from_toml(data: Mapping, where: str) -> ExtractorRegistry:
    registry = ExtractorRegistry()
    extraction = _as_table(data, "extraction", where)
    for entry in _as_list(extraction, "kinds", where):
        schema = tuple(
            FieldSpec(f["name"], f.get("type", "str"), f.get("required", True))
            for f in entry.get("fields", ())
        )
        registry.register_kind(entry["name"], schema)
    return registry


def _mapping_rules_from_toml(data: Mapping, where: str) -> tuple[MappingRule, ...]:
    mapping_data = _as_table(data, "mapping", where)
    entries = _as_list(mapping_data, "rules", where)
    if not entries:
        return DEFAULT_MAPPING_RULES
    return tuple(MappingRule.from_dict(entry) for entry in entries)


def _inference_from_toml(data: Mapping, where: str) -> tuple[tuple[InferenceRule, ...], int]:
    inference_data = _as_table(data, "inference", where)
    names = inference_data.get("rules")
    max_rounds = int(inference_data.get("max_rounds", MAX_ROUNDS))
    if names is None:
        return DEFAULT_INFERENCE_RULES, max_rounds
    rules = []
    for name in names:
        factory = BUILTIN_RULES.get(name)
        if factory is None:
            raise InputError(f"{where}: unknown inference rule {name!r}")
        options = {
            key: inference_data[key]
            for key in ("visit_kind", "restrict_location")
            if key in inference_data
        }
        rules.append(factory(**options))
    return tuple(rules), max_rounds


def _correlation_from_toml(data: Mapping, where: str) -> CorrelationConfig:
    corr = _as_table(data, "correlation", where)
    weights = _as_table(corr, "weights", where)
    mode_name = corr.get("temporal_mode", TemporalMode.PRECEDENCE.value)
    try:
        mode = TemporalMode(mode_name)
    except ValueError:
        raise InputError(f"{where}: unknown temporal mode {mode_name!r}") from None
    top_k = corr.get("top_k")
    return CorrelationConfig(
        alpha=float(corr.get("alpha", 2.0)),
        w_temporal=float(weights.get("temporal", 1.0)),
        w_subject=float(weights.get("subject", 1.0)),
        w_object=float(weights.get("object", 1.0)),
        w_expert=float(weights.get("expert", 1.0)),
        threshold=float(corr.get("threshold", 0.0)),
        top_k=int(top_k) if top_k is not None else None,
        temporal_mode=mode,
    )


def _expert_rules_from_toml(data: Mapping, where: str) -> tuple[ExpertRule, ...]:
    out = []
    for entry in _as_list(data, "expert_rules", where):
        conditions = tuple(
            PairCondition(
                entity=c.get("entity", "object"),
                attribute=c["attribute"],
                values=tuple(str(v) for v in c["values"]),
                side=c.get("side", "both"),
            )
            for c in entry.get("conditions", ())
        )
        if not conditions:
            raise InputError(f"{where}: expert rule {entry.get('name')!r} has no conditions")
        out.append(ExpertRule(name=entry["name"], conditions=conditions))
    return tuple(out)


def load_config(path: str) -> RunConfig:
    """Parse and validate one case configuration document."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InputError(f"config {path} is not valid TOML: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))
    where = path
    try:
        output = _as_table(data, "output", where)
        formats = []
        for name in output.get("formats", [f.value for f in DEFAULT_FORMATS]):
            try:
                formats.append(RenderFormat(name))
            except ValueError:
                raise InputError(f"{where}: unknown output format {name!r}") from None
        inference_rules, max_rounds = _inference_from_toml(data, where)
        return RunConfig(
            scene=_scene_from_toml(data, base, where),
            sources=_sources_from_toml(data, base, where),
            registry=_registry_from_toml(data, where),
            mapping_rules=_mapping_rules_from_toml(data, where),
            inference_rules=inference_rules,
            max_rounds=max_rounds,
            correlation=_correlation_from_toml(data, where),
            expert_rules=_expert_rules_from_toml(data, where),
            output_dir=os.path.join(base, output.get("directory", "out")),
            formats=tuple(formats),
        )
    except (KeyError, TypeError) as exc:
        raise InputError(f"config {path} is malformed: {exc!r}") from None
