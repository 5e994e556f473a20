from datetime import datetime
from pathlib import Path
from typing import Optional

from utils.run_config import RunConfig
from utils.run_log import dumps


def timestamp() -> str:
    return datetime.now().strftime("%Y%m%d_%H%M%S")


def output_path(run: RunConfig, given: Optional[str], subdir: str, name: str) -> Path:
    """`given` if set, else data_dir/subdir/name."""
    path = Path(given) if given else run.data_path / subdir / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def save_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(dumps(data, indent=2))
    return path
