import logging
import re
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from importlib import resources
from pathlib import Path
from typing import Optional, Union

from pydantic import ValidationError
from pydantic_settings import BaseSettings, SettingsConfigDict

from app.core.exceptions import ConfigError
from app.schemas.config_schema import RunConfig

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_file='.env', extra='ignore')

    LOG_LEVEL: str = "INFO"

    # Worker count for sweeps when --jobs is not given
    SWEEP_JOBS: int = 1
    JOBLIB_BACKEND: str = "loky"

    # Significant digits written to MTX files (17 keeps doubles bit-exact)
    MATRIX_DIGITS: int = 17


def get_settings():
    return Settings()

settings = get_settings()


PRESETS = {
    "misaligned-14N": "misaligned_14n.toml",
    "onaxis-13C": "onaxis_13c.toml",
    "lowrank-synthetic": "lowrank_synthetic.toml",
}


class ConfigFileError(ConfigError):
    """Raised when a run configuration document cannot be parsed or validated."""


def _locate_key(text: str, loc: tuple) -> Optional[int]:
    """Returns the 1-based line of `loc` (section, key, ...) in a TOML text, if found."""
    names = [str(part) for part in loc if isinstance(part, str)]
    if not names:
        return None
    lines = text.splitlines()
    section = names[0]
    key = names[1] if len(names) > 1 else None
    header = re.compile(r"^\s*\[\[?\s*" + re.escape(section) + r"(\.[\w.]+)?\s*\]\]?\s*$")
    in_section = False
    section_line = None
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            in_section = bool(header.match(stripped))
            if in_section and section_line is None:
                section_line = number
            continue
        if in_section and key is not None and re.match(r"^" + re.escape(key) + r"\s*=", stripped):
            return number
    return section_line


def parse_run_config(text: str, source: str = "<config>") -> RunConfig:
    """Parses and strictly validates a TOML run configuration."""
    try:
        document = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigFileError(f"{source}: {e}")

    try:
        return RunConfig.model_validate(document)
    except ValidationError as e:
        messages = []
        for error in e.errors():
            loc = tuple(error["loc"])
            line = _locate_key(text, loc)
            field = ".".join(map(str, loc))
            anchor = f"{source}:{line}" if line is not None else source
            messages.append(f"{anchor}: {field}: {error['msg']}")
        raise ConfigFileError(messages[0], details={"errors": messages})


def load_run_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigFileError(f"Cannot read config file {path}: {e}")
    logger.info(f"Loading run configuration from {path}")
    return parse_run_config(text, source=str(path))


def load_preset(name: str) -> RunConfig:
    if name not in PRESETS:
        raise ConfigFileError(f"Unknown preset '{name}'. Choose one of: {', '.join(PRESETS)}")
    text = resources.files("app.presets").joinpath(PRESETS[name]).read_text(encoding="utf-8")
    return parse_run_config(text, source=f"preset:{name}")


def resolve_run_config(config_path: Optional[Union[str, Path]] = None, preset: Optional[str] = None) -> RunConfig:
    """A config file wins over a preset; neither gives the all-defaults configuration."""
    if config_path is not None:
        return load_run_config(config_path)
    if preset is not None:
        return load_preset(preset)
    return RunConfig()
