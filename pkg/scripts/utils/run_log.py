import json
from pathlib import Path
from typing import Optional

import numpy as np
from tqdm import tqdm


def _to_json(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(record, **kwargs) -> str:
    return json.dumps(record, default=_to_json, **kwargs)


class RunLog:
    """Line-delimited JSON records to stdout (unless quiet) and optionally a file."""

    def __init__(self, path: Optional[Path] = None, quiet: bool = False):
        self.quiet = quiet
        self.path = None
        self.records = []
        self._file = None
        if path:
            self.attach(path)

    def attach(self, path) -> None:
        """Start writing to `path`; records logged so far are written first."""
        self.close()
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._file = open(self.path, "w", encoding="utf-8")
        for record in self.records:
            self._file.write(dumps(record) + "\n")
        self._file.flush()

    def log(self, event: str, **fields) -> dict:
        record = {"event": event, **fields}
        self.records.append(record)
        line = dumps(record)
        if not self.quiet:
            tqdm.write(line)
        if self._file:
            self._file.write(line + "\n")
            self._file.flush()
        return record

    def say(self, message: str) -> None:
        if not self.quiet:
            tqdm.write(message)

    def close(self) -> None:
        if self._file:
            self._file.close()
            self._file = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
