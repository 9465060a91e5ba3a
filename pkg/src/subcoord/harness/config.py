"""Line-oriented ``key = value`` configuration files with [sections].

No external parser: blank lines and ``#`` comments are skipped, section
headers are bracketed names, and every other line must read
``key = value``.  Parsed configs preserve order and round-trip through
``dumps`` losslessly (up to comments and spacing).
"""

from __future__ import annotations


class ConfigError(ValueError):
    """Configuration problem, carrying file/line/key context."""


class Config:
    def __init__(self, sections=None, source="<config>"):
        self.sections = sections if sections is not None else {}
        self.source = source

    def has(self, section, key=None):
        if section not in self.sections:
            return False
        return key is None or key in self.sections[section]

    def section(self, name):
        if name not in self.sections:
            raise ConfigError(f"{self.source}: missing section [{name}]")
        return self.sections[name]

    def _raw(self, section, key, default):
        sec = self.sections.get(section, {})
        if key not in sec:
            if default is _REQUIRED:
                raise ConfigError(f"{self.source}: missing key '{key}' in section [{section}]")
            return None
        return sec[key]

    def get(self, section, key, default=None):
        raw = self._raw(section, key, default)
        return default if raw is None else raw

    def get_int(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}' in [{section}] is not an integer: {raw!r}")

    def get_float(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}' in [{section}] is not a number: {raw!r}")

    def get_bool(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        low = raw.lower()
        if low in ("true", "yes", "1", "on"):
            return True
        if low in ("false", "no", "0", "off"):
            return False
        raise ConfigError(f"{self.source}: key '{key}' in [{section}] is not a boolean: {raw!r}")

    def get_int_list(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        try:
            return [int(tok.strip()) for tok in raw.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"{self.source}: key '{key}' in [{section}] is not an integer list: {raw!r}")

    def get_str_list(self, section, key, default=None):
        raw = self._raw(section, key, default)
        if raw is None:
            return default
        return [tok.strip() for tok in raw.split(",") if tok.strip()]

    def require_keys(self, section, allowed):
        """Reject unknown keys with a pointed diagnostic."""
        for key in self.sections.get(section, {}):
            if key not in allowed:
                raise ConfigError(
                    f"{self.source}: unknown key '{key}' in section [{section}]; "
                    f"allowed: {', '.join(sorted(allowed))}"
                )


_REQUIRED = object()


def required(config, section, key, getter="get"):
    return getattr(config, getter)(section, key, _REQUIRED)


def loads(text, source="<config>"):
    sections = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if not name:
                raise ConfigError(f"{source}:{lineno}: empty section name")
            current = sections.setdefault(name, {})
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        if current is None:
            raise ConfigError(f"{source}:{lineno}: key outside any [section]")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        if key in current:
            raise ConfigError(f"{source}:{lineno}: duplicate key '{key}'")
        current[key] = value
    return Config(sections, source)


def load(path):
    with open(path) as fh:
        return loads(fh.read(), source=str(path))


def dumps(config):
    lines = []
    for name, sec in config.sections.items():
        lines.append(f"[{name}]")
        for key, value in sec.items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
