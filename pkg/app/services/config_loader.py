# app/services/config_loader.py
from __future__ import annotations

from pathlib import Path
from typing import Any, Optional

import yaml
from pydantic import ValidationError

from app.models.errors import ConfigError
from app.models.schemas import RunConfig


def _locate(root: Optional[yaml.Node], loc: tuple[Any, ...]) -> Optional[int]:
    """
    Walk a composed YAML node tree along a pydantic error location and return the
    1-based line of the deepest node reached. Location parts that name union
    branches (not present in the document) are skipped.
    """
    node = root
    if node is None:
        return None

    for part in loc:
        if isinstance(node, yaml.MappingNode) and isinstance(part, str):
            child = next((v for k, v in node.value if getattr(k, "value", None) == part), None)
            if child is not None:
                node = child
        elif isinstance(node, yaml.SequenceNode) and isinstance(part, int):
            if 0 <= part < len(node.value):
                node = node.value[part]
    return node.start_mark.line + 1


def _from_validation_error(e: ValidationError, root: Optional[yaml.Node]) -> ConfigError:
    first = e.errors()[0]
    loc = tuple(first.get("loc", ()))
    path = ".".join(str(p) for p in loc) or "<root>"
    line = _locate(root, loc) if loc else None
    extra = f" (+{e.error_count() - 1} more)" if e.error_count() > 1 else ""
    return ConfigError(f"{path}: {first.get('msg', 'invalid value')}{extra}", line=line)


def load_config_text(text: str) -> RunConfig:
    try:
        data = yaml.safe_load(text)
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        problem = getattr(e, "problem", None) or str(e)
        raise ConfigError(f"invalid YAML: {problem}", line=line) from e

    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping at the top level", line=1)

    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise _from_validation_error(e, root) from e


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {p}: {e}") from e
    return load_config_text(text)


def dump_config(cfg: RunConfig) -> str:
    """YAML text that load_config_text parses back into an equal RunConfig."""
    data = cfg.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
