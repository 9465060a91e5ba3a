from .config import Config, ConfigError, dumps, load, loads
from .rng import stream

__all__ = ["Config", "ConfigError", "dumps", "load", "loads", "stream"]
