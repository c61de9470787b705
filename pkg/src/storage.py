"""Report files and the on-disk action cache."""
import json
import logging
import os
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CacheError
from .field import FieldCtx
from .geometry import GRAM_MODELS, standard_subplane
from .group import ActionCtx, model_generators, orbit_size
from .models import RunReport

logger = logging.getLogger('baersaxl.storage')

DEFAULT_DIR = Path.home() / '.baersaxl'

CACHE_MAGIC = b'BSAX'
CACHE_VERSION = 1
# Arrays following the header, in file order
CACHE_ARRAYS = ('points', 'parent', 'parent_gen', 'transversal', 'stab', 'stab_gens')


def _write_private(path: Path, write) -> bool:
    """Write through a temp file, restrict permissions, then rename into place."""
    try:
        path.parent.mkdir(parents=True, exist_ok=True, mode=0o700)
        temp_path = path.with_name(path.name + '.tmp')
        write(temp_path)
        os.chmod(temp_path, 0o600)
        temp_path.replace(path)
        return True
    except (OSError, TypeError, ValueError) as exc:
        logger.error("could not write %s: %s", path, exc)
        return False


class ReportWriter:
    """Writes a RunReport as JSON plus a plain-text summary next to it."""

    DEFAULT_FILE = DEFAULT_DIR / 'report.json'

    def __init__(self, file_path: Optional[Path] = None):
        self.file_path = Path(file_path) if file_path else self.DEFAULT_FILE

    @property
    def summary_path(self) -> Path:
        return self.file_path.with_name(self.file_path.name + '.txt')

    def save(self, report: RunReport, include_timings: bool = True) -> bool:
        """
        Save the report atomically.
        Returns True if both files were written.
        """
        def write_json(temp: Path) -> None:
            with open(temp, 'w', encoding='utf-8') as f:
                json.dump(report.to_dict(include_timings), f, indent=2, sort_keys=True, ensure_ascii=False)
                f.write('\n')

        def write_text(temp: Path) -> None:
            with open(temp, 'w', encoding='utf-8') as f:
                f.write('\n'.join(report.summary_lines()) + '\n')

        ok = _write_private(self.file_path, write_json) and _write_private(self.summary_path, write_text)
        if ok:
            logger.info("report written to %s", self.file_path)
        return ok

    def load(self) -> Optional[RunReport]:
        """Read a report back; None when missing or unreadable."""
        if not self.file_path.exists():
            return None
        try:
            with open(self.file_path, 'r', encoding='utf-8') as f:
                return RunReport.from_dict(json.load(f))
        except (json.JSONDecodeError, KeyError, OSError) as exc:
            logger.warning("unreadable report %s: %s", self.file_path, exc)
            return None


class ActionCache:
    """
    Binary cache of an enumerated ActionCtx.

    Layout: the magic bytes, then numpy arrays in .npy framing: a header
    (version, p, m, d, |Omega|, gram) followed by CACHE_ARRAYS. The subplane
    bases are the rows of the transversal applied to the basis of w0.
    """

    def __init__(self, file_path: Path):
        self.file_path = Path(file_path)

    @staticmethod
    def header_for(field: FieldCtx, gram: str) -> np.ndarray:
        return np.array([CACHE_VERSION, field.p, field.m, field.d, orbit_size(field.q),
                         GRAM_MODELS.index(gram)], dtype=np.int64)

    def save(self, action: ActionCtx) -> bool:
        """Returns True if the cache was written."""
        header = self.header_for(action.field, action.geom.gram_kind)

        def write(temp: Path) -> None:
            with open(temp, 'wb') as f:
                f.write(CACHE_MAGIC)
                np.save(f, header, allow_pickle=False)
                for name in CACHE_ARRAYS:
                    np.save(f, np.ascontiguousarray(getattr(action, name)), allow_pickle=False)

        ok = _write_private(self.file_path, write)
        if ok:
            logger.info("action cache written to %s", self.file_path)
        return ok

    def _read(self, expected: np.ndarray) -> dict:
        with open(self.file_path, 'rb') as f:
            if f.read(len(CACHE_MAGIC)) != CACHE_MAGIC:
                raise ValueError("bad magic bytes")
            header = np.load(f, allow_pickle=False)
            if header.shape != expected.shape or header[0] != CACHE_VERSION:
                raise ValueError("unsupported cache version")
            if not np.array_equal(header, expected):
                raise CacheError(f"{self.file_path} belongs to another context "
                                 f"(p, m, d, |Omega|, gram) = {tuple(header[1:].tolist())}")
            return {name: np.load(f, allow_pickle=False) for name in CACHE_ARRAYS}

    def load(self, field: FieldCtx, gram: str) -> Optional[ActionCtx]:
        """
        The cached ActionCtx for (field, gram), or None when there is none.

        A corrupt file is renamed to *.backup and treated as absent. A valid
        cache of another context raises CacheError.
        """
        if not self.file_path.exists():
            return None
        expected = self.header_for(field, gram)
        try:
            arrays = self._read(expected)
        except (OSError, ValueError, EOFError) as exc:
            self._quarantine(exc)
            return None

        geom, gens = model_generators(field, gram)
        points = arrays['points'].astype(geom.index_dtype)
        if len(points) != expected[4] or not np.array_equal(points[0], standard_subplane(geom).points):
            self._quarantine("point table does not start at w0")
            return None
        logger.info("action loaded from cache %s", self.file_path)
        return ActionCtx(geom, gens, points, arrays['parent'], arrays['parent_gen'],
                         arrays['transversal'], arrays['stab'], arrays['stab_gens'])

    def _quarantine(self, reason) -> None:
        backup_path = self.file_path.with_name(self.file_path.name + '.backup')
        logger.warning("corrupt action cache %s (%s), moved to %s", self.file_path, reason, backup_path)
        try:
            self.file_path.rename(backup_path)
        except OSError:
            pass
