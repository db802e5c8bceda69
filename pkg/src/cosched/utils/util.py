import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Iterator, List, Mapping, TypeVar, Union

logger = logging.getLogger(__name__)

T = TypeVar("T")
PathLike = Union[str, Path]


def chunked(items: Iterable[T], chunk_size: int = 25) -> Iterator[List[T]]:
    """
    Split an iterable into lists of at most ``chunk_size`` items.

    Args:
        items: Items to group
        chunk_size: Number of items per chunk

    Returns:
        Generator yielding chunks in input order
    """
    if chunk_size < 1:
        raise ValueError(f"chunk_size must be positive, got {chunk_size}")
    chunk: List[T] = []
    for item in items:
        chunk.append(item)
        if len(chunk) >= chunk_size:
            yield chunk
            chunk = []

    # Yield the remainder
    if chunk:
        yield chunk


def ensure_dir(directory: PathLike) -> Path:
    path = Path(directory)
    if not path.exists():
        logger.debug("creating directory %s", path)
        os.makedirs(path, exist_ok=True)
    return path


def dumps_json(data: Any) -> str:
    """Deterministic JSON text: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    path.write_text(dumps_json(data), encoding="utf-8")
    return path


def write_jsonl(path: PathLike, lines: Iterable[str]) -> Path:
    path = Path(path)
    ensure_dir(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        for line in lines:
            out.write(line + "\n")
    return path


def read_json(path: PathLike) -> Mapping[str, Any]:
    with open(path, "r", encoding="utf-8") as source:
        return json.load(source)


def read_jsonl(path: PathLike) -> List[Mapping[str, Any]]:
    with open(path, "r", encoding="utf-8") as source:
        return [json.loads(line) for line in source if line.strip()]
