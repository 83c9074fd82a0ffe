import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from app.core.exceptions import ConfigurationError, NotFoundError, ValidationError
from app.models.network import PARAMETER_FORMAT, PARAMETER_VERSION, Network2DParams, NetworkParams

logger = logging.getLogger(__name__)

AnyParams = Union[NetworkParams, Network2DParams]


class ParameterRepository:
    """
    File store for network parameter documents.

    Documents are JSON objects with a ``format``/``version`` header and a
    ``dimension`` of 2 (one angle per node) or 3 (Euler triples).
    """

    def _load(self, path: Union[str, Path]) -> Dict[str, Any]:
        path = Path(path)
        if not path.is_file():
            raise NotFoundError(f"Parameter file '{path}' not found")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"Parameter file '{path}' is not valid JSON: {exc}")
        if not isinstance(data, dict) or data.get("format") != PARAMETER_FORMAT:
            raise ConfigurationError(f"'{path}' is not a {PARAMETER_FORMAT} document")
        if data.get("version") != PARAMETER_VERSION:
            raise ConfigurationError(
                f"Unsupported parameter version {data.get('version')} in '{path}'"
            )
        return data

    def read(self, path: Union[str, Path]) -> AnyParams:
        data = self._load(path)
        dimension = data.get("dimension")
        model = {2: Network2DParams, 3: NetworkParams}.get(dimension)
        if model is None:
            raise ConfigurationError(f"Unsupported dimension {dimension!r} in '{path}'")
        try:
            params = model.from_dict(data)
        except (KeyError, TypeError, ValueError, ValidationError) as exc:
            raise ConfigurationError(f"Malformed parameter file '{path}': {exc}")
        logger.info("Loaded %d-D parameters of depth %d from %s", dimension, params.depth, path)
        return params

    def read_3d(self, path: Union[str, Path]) -> NetworkParams:
        params = self.read(path)
        if not isinstance(params, NetworkParams):
            raise ConfigurationError(f"'{path}' holds planar parameters; transfer them first")
        return params

    def read_2d(self, path: Union[str, Path]) -> Network2DParams:
        params = self.read(path)
        if not isinstance(params, Network2DParams):
            raise ConfigurationError(f"'{path}' does not hold planar parameters")
        return params

    def write(self, params: AnyParams, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(params.to_dict(), indent=2) + "\n", encoding="utf-8")
        logger.info("Wrote parameters to %s", path)
        return path
