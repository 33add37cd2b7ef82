import contextlib
import fcntl
import json
import logging
import os
from pathlib import Path
from typing import Iterator, Optional, Union

from pydantic import ValidationError

from .config import ENGINE_VERSION
from .errors import CacheLockedError
from .schemas import CountCacheEntry, MatrixCount, RowSums

logger = logging.getLogger("symstoch.cache")

CacheKey = tuple[int, tuple[int, ...], str]


def cache_load(path: Union[str, Path]) -> dict[CacheKey, CountCacheEntry]:
    """Read one JSON object per line; malformed lines are skipped with a warning."""
    path = Path(path)
    entries: dict[CacheKey, CountCacheEntry] = {}
    if not path.exists():
        logger.debug("No cache at %s", path)
        return entries
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                entry = CountCacheEntry.model_validate(json.loads(line))
            except (json.JSONDecodeError, ValidationError) as exc:
                logger.warning("Skipping malformed cache line %d in %s: %s", lineno, path, exc)
                continue
            entries[entry.key] = entry
    logger.debug("Loaded %d cache entries from %s", len(entries), path)
    return entries


def cache_store(path: Union[str, Path], entries: dict[CacheKey, CountCacheEntry]) -> None:
    """Write all entries sorted by key, replacing the file atomically."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    try:
        with open(tmp, "w", encoding="utf-8") as f:
            for key in sorted(entries):
                f.write(json.dumps(entries[key].model_dump(), sort_keys=True) + "\n")
        os.replace(tmp, path)
    except Exception as exc:
        logger.error("Failed to store cache at %s: %s", path, exc)
        tmp.unlink(missing_ok=True)
        raise
    logger.info("Stored %d cache entries at %s", len(entries), path)


@contextlib.contextmanager
def cache_lock(path: Union[str, Path]) -> Iterator[None]:
    """Exclusive advisory lock on a sibling .lock file; fails fast on contention."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lock_path = path.with_name(path.name + ".lock")
    with open(lock_path, "w") as handle:
        try:
            fcntl.flock(handle, fcntl.LOCK_EX | fcntl.LOCK_NB)
        except BlockingIOError as exc:
            logger.error("Cache %s is locked by another process", path)
            raise CacheLockedError(f"cache {path} is locked by another process") from exc
        try:
            yield
        finally:
            fcntl.flock(handle, fcntl.LOCK_UN)


class CountCache:
    """Exact counts keyed by sorted row sums and engine version."""

    def __init__(self, path: Union[str, Path], engine_version: str = ENGINE_VERSION) -> None:
        self.path = Path(path)
        self.engine_version = engine_version
        self.entries = cache_load(self.path)
        self.dirty = False

    def _key(self, rs: RowSums) -> CacheKey:
        return (rs.n, tuple(sorted(rs.t)), self.engine_version)

    def get(self, rs: RowSums) -> Optional[MatrixCount]:
        entry = self.entries.get(self._key(rs))
        if entry is None:
            return None
        logger.debug("Cache hit for %s", rs.t)
        return MatrixCount(value=int(entry.count))

    def put(self, rs: RowSums, count: MatrixCount) -> None:
        canonical = rs.canonical()
        entry = CountCacheEntry(
            n=canonical.n,
            t_sorted=list(canonical.t),
            count=str(count.value),
            engine_version=self.engine_version,
        )
        self.entries[entry.key] = entry
        self.dirty = True

    def save(self) -> None:
        if not self.dirty:
            return
        with cache_lock(self.path):
            # merge with entries written by other runs since we loaded
            merged = cache_load(self.path)
            merged.update(self.entries)
            cache_store(self.path, merged)
        self.entries = merged
        self.dirty = False

    def clear(self) -> None:
        with cache_lock(self.path):
            cache_store(self.path, {})
        self.entries = {}
        self.dirty = False
