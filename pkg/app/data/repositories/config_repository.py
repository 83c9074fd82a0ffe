import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Type, TypeVar, Union

import pydantic

from app.core.exceptions import ConfigurationError, NotFoundError

logger = logging.getLogger(__name__)

ConfigModel = TypeVar("ConfigModel", bound=pydantic.BaseModel)


def parse_value(text: str) -> Any:
    """JSON scalar if ``text`` parses as one, else the raw string."""
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(data: Dict[str, Any], key: str, value: Any) -> Dict[str, Any]:
    """
    Set a dotted ``key`` (e.g. ``scale.h`` or ``cohesive.2.tau``) in a raw document.

    Intermediate objects are created when missing; list entries are
    addressed by integer position.
    """
    parts = key.split(".")
    node: Any = data
    for part in parts[:-1]:
        if isinstance(node, list):
            try:
                node = node[int(part)]
            except (ValueError, IndexError):
                raise ConfigurationError(f"Override key '{key}' does not match the document")
        else:
            node = node.setdefault(part, {})
        if not isinstance(node, (dict, list)):
            raise ConfigurationError(f"Override key '{key}' does not match the document")
    last = parts[-1]
    if isinstance(node, list):
        try:
            node[int(last)] = value
        except (ValueError, IndexError):
            raise ConfigurationError(f"Override key '{key}' does not match the document")
    else:
        node[last] = value
    return data


class ConfigRepository:
    """Loads versioned JSON configuration documents into pydantic models."""

    def read_raw(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        if not path.is_file():
            raise NotFoundError(f"Config file '{path}' not found")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"Config file '{path}' is not valid JSON: {exc}")
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file '{path}' must hold a JSON object")
        return data

    def validate(self, model: Type[ConfigModel], data: Mapping[str, Any], source: str = "<config>") -> ConfigModel:
        try:
            return model.model_validate(data)
        except pydantic.ValidationError as exc:
            raise ConfigurationError(f"Invalid config '{source}': {exc}")

    def load(
        self,
        model: Type[ConfigModel],
        path: Union[str, Path],
        overrides: Optional[Mapping[str, Any]] = None,
    ) -> ConfigModel:
        """
        Read, override and validate a config document.

        Raises:
            NotFoundError: If the file does not exist.
            ConfigurationError: On a JSON or schema error.
        """
        data = self.read_raw(path)
        for key, value in (overrides or {}).items():
            apply_override(data, key, value)
        config = self.validate(model, data, str(path))
        logger.info("Loaded %s from %s", model.__name__, path)
        return config
