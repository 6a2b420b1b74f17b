"""TOML loading with a minimal fallback reader.

Uses the stdlib parser on Python 3.11+ (or ``tomli`` when installed).  On
older interpreters without either, falls back to a small reader covering the
subset the experiment configs actually use: ``[table]`` headers, bare keys,
strings, booleans, integers, floats, single-line arrays, and ``#`` comments.
"""

from __future__ import annotations

from .errors import ConfigError

try:  # pragma: no cover - depends on interpreter version
    import tomllib as _impl
except ModuleNotFoundError:  # pragma: no cover
    try:
        import tomli as _impl
    except ModuleNotFoundError:
        _impl = None


def loads(text: str) -> dict:
    if _impl is not None:
        try:
            return _impl.loads(text)
        except Exception as exc:
            raise ConfigError(f"TOML parse error: {exc}") from exc
    return _parse_minimal(text)


def _strip_comment(line: str) -> str:
    out = []
    in_str: str | None = None
    for ch in line:
        if in_str:
            out.append(ch)
            if ch == in_str:
                in_str = None
        elif ch in "\"'":
            in_str = ch
            out.append(ch)
        elif ch == "#":
            break
        else:
            out.append(ch)
    return "".join(out).strip()


def _parse_scalar(tok: str, lineno: int):
    tok = tok.strip()
    if not tok:
        raise ConfigError(f"TOML line {lineno}: empty value")
    if tok[0] in "\"'":
        if len(tok) < 2 or tok[-1] != tok[0]:
            raise ConfigError(f"TOML line {lineno}: unterminated string")
        return tok[1:-1]
    if tok == "true":
        return True
    if tok == "false":
        return False
    try:
        return int(tok)
    except ValueError:
        pass
    try:
        return float(tok)
    except ValueError:
        raise ConfigError(f"TOML line {lineno}: cannot parse value {tok!r}") from None


def _split_array(body: str, lineno: int) -> list[str]:
    items, depth, cur, in_str = [], 0, [], None
    for ch in body:
        if in_str:
            cur.append(ch)
            if ch == in_str:
                in_str = None
        elif ch in "\"'":
            in_str = ch
            cur.append(ch)
        elif ch == "[":
            depth += 1
            cur.append(ch)
        elif ch == "]":
            depth -= 1
            cur.append(ch)
        elif ch == "," and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if "".join(cur).strip():
        items.append("".join(cur))
    if in_str or depth != 0:
        raise ConfigError(f"TOML line {lineno}: malformed array")
    return items


def _parse_value(tok: str, lineno: int):
    tok = tok.strip()
    if tok.startswith("["):
        if not tok.endswith("]"):
            raise ConfigError(f"TOML line {lineno}: arrays must close on the same line")
        return [_parse_value(item, lineno) for item in _split_array(tok[1:-1], lineno)]
    return _parse_scalar(tok, lineno)


def _parse_minimal(text: str) -> dict:
    root: dict = {}
    table = root
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or line.startswith("[["):
                raise ConfigError(f"TOML line {lineno}: unsupported table header")
            name = line[1:-1].strip()
            if not name or "." in name or not name.replace("_", "").replace("-", "").isalnum():
                raise ConfigError(f"TOML line {lineno}: bad table name {name!r}")
            table = root.setdefault(name, {})
            if not isinstance(table, dict):
                raise ConfigError(f"TOML line {lineno}: {name!r} already a value")
            continue
        if "=" not in line:
            raise ConfigError(f"TOML line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key = key.strip()
        if not key or not key.replace("_", "").replace("-", "").isalnum():
            raise ConfigError(f"TOML line {lineno}: bad key {key!r}")
        if key in table:
            raise ConfigError(f"TOML line {lineno}: duplicate key {key!r}")
        table[key] = _parse_value(value, lineno)
    return root
