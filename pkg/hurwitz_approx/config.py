import os
import inspect
import logging
from fractions import Fraction
from pathlib import Path
from typing import Dict, Any, List, Optional, Union

# Global state
_settings = None
_project_root = None
_is_initialized = False
_initialized_by = None

ENV_FILE_NAME = ".env.hurwitz_approx"

# ========================================
# LIBRARY DEFAULTS
# ========================================
DEFAULTS: Dict[str, Any] = {
    'precision_bits': 256,
    'budget': {
        'multiplier': 8,
    },
    'oracle': {
        'max_bits': 4096,
        'tolerance': '1e-9',
        'qmax': 1048576,
    },
    'sweep': {
        'workers': 1,
        'results_dir': 'results',
    },
}

EnvFiles = Optional[Union[str, Path, List[Union[str, Path]]]]


class DotDict(dict):
    """Dictionary with dot-notation access to nested sections."""

    def __init__(self, data=None):
        super().__init__()
        for key, value in (data or {}).items():
            self[key] = value

    def __getitem__(self, key):
        if '.' not in key:
            return super().__getitem__(key)
        node = self
        for part in key.split('.'):
            if not isinstance(node, dict) or part not in node:
                raise KeyError(key)
            node = dict.__getitem__(node, part)
        return node

    def __setitem__(self, key, value):
        if isinstance(value, dict) and not isinstance(value, DotDict):
            value = DotDict(value)
        if '.' not in key:
            super().__setitem__(key, value)
            return
        head, _, rest = key.partition('.')
        section = self.get(head)
        if not isinstance(section, DotDict):
            section = DotDict()
            super().__setitem__(head, section)
        section[rest] = value

    def __contains__(self, key):
        try:
            self[key]
        except KeyError:
            return False
        return True

    def get(self, key, default=None):
        try:
            return self[key]
        except KeyError:
            return default


class Settings:
    """Read-only view over the layered configuration."""

    def __init__(self, data: Dict[str, Any], project_root: Path):
        self._data = DotDict(data)
        self._project_root = project_root

    def get(self, key: str, default: Any = None) -> Any:
        return self._data.get(key, default)

    def __getitem__(self, key: str) -> Any:
        return self._data[key]

    def __contains__(self, key: str) -> bool:
        return key in self._data

    def to_dict(self) -> Dict[str, Any]:
        return _plain(self._data)

    def to_flat_dict(self) -> Dict[str, Any]:
        return _flatten_nested_dict(self._data)

    def fraction(self, key: str) -> Fraction:
        """Settings value parsed as an exact rational ("1e-9" -> 1/10**9)."""
        return Fraction(str(self[key]))

    def __getattr__(self, name: str) -> Any:
        """Attributes ending in '_path' build paths under the project root.

        ``results_path`` honours the ``sweep.results_dir`` setting.
        """
        if not name.endswith('_path'):
            raise AttributeError(f"'{self.__class__.__name__}' object has no attribute '{name}'")
        dir_name = name[:-len('_path')]
        if dir_name == 'results':
            dir_name = self._data.get('sweep.results_dir', 'results')

        def path_helper(filename: str = "") -> str:
            path = self._project_root / dir_name
            return str(path / filename) if filename else str(path)

        return path_helper


def _plain(d: Dict[str, Any]) -> Dict[str, Any]:
    return {k: _plain(v) if isinstance(v, dict) else v for k, v in d.items()}


def _flatten_nested_dict(nested: Dict[str, Any], parent_key: str = '') -> Dict[str, Any]:
    """
    Flatten nested sections into dot-notation keys.

    Example:
        {'oracle': {'max_bits': 4096}} -> {'oracle.max_bits': 4096}
    """
    flat: Dict[str, Any] = {}
    for key, value in nested.items():
        dotted = f"{parent_key}.{key}" if parent_key else key
        if isinstance(value, dict):
            flat.update(_flatten_nested_dict(value, dotted))
        else:
            flat[dotted] = value
    return flat


def find_project_root(start_path: Optional[Union[str, Path]] = None) -> Path:
    """Walk upwards from ``start_path`` to the first directory that looks like a project."""
    current = Path(start_path) if start_path is not None else Path.cwd()
    if current.is_file():
        current = current.parent
    current = current.resolve()

    indicators = ['.git', 'pyproject.toml', 'setup.py', 'setup.cfg', ENV_FILE_NAME]
    while current != current.parent:
        if any((current / indicator).exists() for indicator in indicators):
            return current
        current = current.parent
    return Path.cwd()


def smart_convert(str_value: str, default_value: Any) -> Any:
    """Convert an environment string to the type of the value it overrides."""
    if isinstance(default_value, str):
        return str_value

    if isinstance(default_value, int):
        try:
            return int(str_value)
        except ValueError:
            pass
        # "1e6" for an integer setting
        try:
            converted = float(str_value)
        except ValueError:
            return str_value
        return int(converted) if converted.is_integer() else str_value

    return str_value


def apply_environment_variables(config: DotDict) -> None:
    """Override known keys from ``os.environ`` (``oracle.max_bits`` <- ``ORACLE__MAX_BITS``)."""
    checked = 0
    for dot_key in _flatten_nested_dict(config):
        env_var = dot_key.replace('.', '__').upper()
        checked += 1
        if env_var == 'PROJECT_ROOT' or env_var not in os.environ:
            continue
        new_value = smart_convert(os.environ[env_var], config[dot_key])
        config[dot_key] = new_value
        logging.debug(f"Environment override: {env_var} -> {dot_key} = {new_value}")

    logging.debug(f"Checked {checked} potential environment variables")


def _resolve_env_files(project_root: Path, env_files: EnvFiles) -> List[Path]:
    if env_files is None:
        default_file = project_root / ENV_FILE_NAME
        return [default_file] if default_file.exists() else []

    if isinstance(env_files, (str, Path)):
        env_files = [env_files]

    found = []
    for env_file in env_files:
        env_path = Path(env_file)
        if not env_path.is_absolute():
            env_path = project_root / env_path
        if env_path.exists():
            found.append(env_path)
        else:
            logging.warning(f"Environment file not found: {env_path}")
    return found


def _parse_env_file(env_file: Path) -> Dict[str, str]:
    """Read an env file into dot-notation keys (``ORACLE__MAX_BITS`` -> ``oracle.max_bits``)."""
    from dotenv import dotenv_values

    parsed = {}
    for key, value in dotenv_values(env_file).items():
        if value is None:
            continue
        parsed[key.strip().lower().replace('__', '.')] = value
    return parsed


def setup_environment(
    default_config: Optional[Dict[str, Any]] = None,
    env_files: EnvFiles = None,
    force_reinit: bool = False
) -> None:
    """Build the process-wide settings.

    Args:
        default_config: Overrides for the library defaults (nested or dot-notation keys).
        env_files: Env file(s) to load. Defaults to ``.env.hurwitz_approx`` in the project root.
        force_reinit: Rebuild even if another caller already initialised the settings.
    """
    global _settings, _project_root, _is_initialized, _initialized_by

    caller_frame = inspect.currentframe().f_back
    caller_info = f"{caller_frame.f_code.co_filename}:{caller_frame.f_lineno}"

    if _is_initialized and not force_reinit:
        logging.info(f"Settings already initialized by {_initialized_by}; ignoring call from {caller_info}")
        return

    _initialized_by = caller_info

    # env files cannot move the project root
    if 'PROJECT_ROOT' in os.environ:
        _project_root = Path(os.environ['PROJECT_ROOT']).resolve()
        logging.info(f"Using PROJECT_ROOT from environment: {_project_root}")
    else:
        _project_root = find_project_root()
        logging.debug(f"Auto-detected project root: {_project_root}")

    config_data = DotDict()
    for key, value in _flatten_nested_dict(DEFAULTS).items():
        config_data[key] = value
    for key, value in _flatten_nested_dict(default_config or {}).items():
        config_data[key] = value
    config_data['project_root'] = str(_project_root)

    apply_environment_variables(config_data)

    for env_file in _resolve_env_files(_project_root, env_files):
        file_data = _parse_env_file(env_file)
        for key, str_value in file_data.items():
            if key == 'project_root':
                logging.warning("Ignoring project_root in env file - use PROJECT_ROOT env var instead")
                continue
            if key in config_data:
                config_data[key] = smart_convert(str_value, config_data[key])
            else:
                config_data[key] = str_value
            logging.debug(f"Env file setting: {key} = {config_data[key]}")
        logging.debug(f"Loaded {len(file_data)} variables from: {env_file}")

    _settings = Settings(config_data, _project_root)
    _is_initialized = True

    logging.info(f"Settings initialized by {_initialized_by} (project root {_project_root})")


def get_config() -> Settings:
    """Return the settings, initialising them from the defaults on first use."""
    if _settings is None:
        setup_environment()
    return _settings


def is_initialized() -> bool:
    return _is_initialized


def get_initialization_info() -> Optional[str]:
    """Return ``file:line`` of the caller that initialised the settings."""
    return _initialized_by if _is_initialized else None


def _reset_for_testing() -> None:
    """Reset global state for testing purposes. Internal use only."""
    global _settings, _project_root, _is_initialized, _initialized_by
    _settings = None
    _project_root = None
    _is_initialized = False
    _initialized_by = None
