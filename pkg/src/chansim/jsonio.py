"""Deterministic JSON writing: 17-significant-digit floats, sorted keys,
atomic file replacement.  Identical payloads serialize to identical bytes."""

import json
import os
import tempfile


def _format(value, indent, level):
    pad = " " * (indent * level)
    pad_in = " " * (indent * (level + 1))
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, int):
        return repr(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValueError("non-finite float in JSON payload")
        return format(value, ".17g")
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [_format(v, indent, level + 1) for v in value]
        return "[\n" + ",\n".join(pad_in + it for it in items) + "\n" + pad + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [
            f"{json.dumps(str(k))}: {_format(value[k], indent, level + 1)}"
            for k in sorted(value)
        ]
        return "{\n" + ",\n".join(pad_in + it for it in items) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(value)!r}")


def dumps(payload) -> str:
    return _format(payload, 2, 0) + "\n"


def write_atomic(path: str, payload) -> None:
    text = dumps(payload)
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read(path: str):
    with open(path, "r") as handle:
        return json.load(handle)
