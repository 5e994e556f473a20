import os
import sys
from pathlib import Path
from typing import List, Optional

import inquirer

from utils.errors import UsageError


def list_files(directory: Path, pattern: str) -> List[Path]:
    """Files matching `pattern`, newest first."""
    if not directory.exists():
        return []
    return sorted(directory.glob(pattern), key=lambda p: p.stat().st_mtime, reverse=True)


def pick_file(directory: Path, pattern: str, what: str, given: Optional[str] = None) -> Path:
    """Return `given` if set, else let the user pick from `directory` (only when attached to a terminal)."""
    if given:
        return Path(given)
    files = list_files(Path(directory), pattern)
    if not sys.stdin.isatty():
        raise UsageError(f"no {what} given (pass it explicitly when not running interactively)")
    if not files:
        raise UsageError(f"no {what} given and none found in {directory}")

    questions = [
        inquirer.List('file',
                      message=f"Select the {what} to use",
                      choices=[os.path.basename(f) for f in files],
                      carousel=True)
    ]
    answers = inquirer.prompt(questions)
    if not answers:
        raise UsageError("file selection cancelled")
    return next(f for f in files if f.name == answers['file'])
