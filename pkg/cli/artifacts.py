"""
Артефакты запуска: файлы результатов и manifest.json с хешами содержимого
"""

import csv
import hashlib
import logging
import time
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import config
from models.io import save_json

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA_VERSION = 1
LOG_NAME = "run.log"


def file_sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


class RunArtifacts:
    """Выходная директория одного запуска команды"""

    def __init__(self, out_dir: Path, command: str, config_echo: Dict[str, Any], seeds: Dict[str, Any]):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.command = command
        self.config_echo = config_echo
        self.seeds = seeds
        self.summary: Dict[str, Any] = {}
        self._files: List[Path] = []
        self._started = time.perf_counter()

    @property
    def log_path(self) -> Path:
        return self.out_dir / LOG_NAME

    def path(self, name: str) -> Path:
        path = self.out_dir / name
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def register(self, path: Path) -> Path:
        path = Path(path)
        if path not in self._files:
            self._files.append(path)
        return path

    def write_json(self, name: str, data: Dict[str, Any]) -> Path:
        path = self.path(name)
        save_json(data, path)
        return self.register(path)

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        path = self.path(name)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
        return self.register(path)

    def finalize(self, extra_summary: Optional[Dict[str, Any]] = None) -> Path:
        """Запись manifest.json; файл лога добавляется последним"""
        if extra_summary:
            self.summary.update(extra_summary)
        for handler in logging.getLogger().handlers:
            handler.flush()
        if self.log_path.exists():
            self.register(self.log_path)

        files = [
            {"path": path.relative_to(self.out_dir).as_posix(), "sha256": file_sha256(path)}
            for path in sorted(self._files)
            if path.exists()
        ]
        manifest = {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "command": self.command,
            "library_version": config.VERSION,
            "config": self.config_echo,
            "seeds": self.seeds,
            "summary": self.summary,
            "wall_clock_seconds": round(time.perf_counter() - self._started, 3),
            "files": files,
        }
        path = self.out_dir / MANIFEST_NAME
        save_json(manifest, path)
        logger.info(f"Манифест сохранен: {path} ({len(files)} файлов)")
        return path
