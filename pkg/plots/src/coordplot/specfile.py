"""The ``key = value`` spec format shared with the experiment harness.

This package talks to the harness only through files, so the tiny parser
is duplicated here on purpose: sections in square brackets, one
``key = value`` per line, ``#`` comments, order preserved.
"""

from __future__ import annotations


class SpecError(ValueError):
    """Spec-file problem with file/line context."""


def loads(text, source="<spec>"):
    sections = {}
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            name = stripped[1:-1].strip()
            if not name:
                raise SpecError(f"{source}:{lineno}: empty section name")
            if name in sections:
                raise SpecError(f"{source}:{lineno}: duplicate section [{name}]")
            current = sections.setdefault(name, {})
            continue
        if "=" not in stripped:
            raise SpecError(f"{source}:{lineno}: expected 'key = value', got {stripped!r}")
        if current is None:
            raise SpecError(f"{source}:{lineno}: key outside any [section]")
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not key:
            raise SpecError(f"{source}:{lineno}: empty key")
        if key in current:
            raise SpecError(f"{source}:{lineno}: duplicate key '{key}'")
        current[key] = value.strip()
    return sections


def load(path):
    with open(path) as fh:
        return loads(fh.read(), source=str(path))
