from __future__ import annotations

from pathlib import Path

PROJECT_ROOT: Path = Path(__file__).resolve().parent.parent.parent
CORE_DIR: Path = PROJECT_ROOT / "core"
SCENARIO_DIR: Path = CORE_DIR / "scenarios"
SETTINGS_FILE: Path = CORE_DIR / "settings.json"

LOG_DIR: Path = PROJECT_ROOT / "logs"
CLI_LOG_FILE: Path = LOG_DIR / "condcast_cli.log"

DEFAULT_OUTPUT_DIR: Path = PROJECT_ROOT / "output"

SCENARIO_SUFFIXES: tuple[str, ...] = (".yaml", ".yml")


def find_scenario(name: str | Path) -> Path | None:
    """
    Resolve a scenario file.

    Search priority:
    1. ``name`` as a path (absolute or relative to the working directory)
    2. ``core/scenarios/<name>`` with or without a YAML suffix

    Returns:
        Path to the scenario or None if not found
    """
    candidate = Path(name)
    if candidate.is_file():
        return candidate

    search_paths = [SCENARIO_DIR / candidate.name]
    if candidate.suffix not in SCENARIO_SUFFIXES:
        search_paths.extend(SCENARIO_DIR / f"{candidate.name}{suffix}" for suffix in SCENARIO_SUFFIXES)

    for path in search_paths:
        if path.is_file():
            return path
    return None


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped in ``core/scenarios``."""
    if not SCENARIO_DIR.is_dir():
        return []
    return sorted(p.stem for p in SCENARIO_DIR.iterdir() if p.suffix in SCENARIO_SUFFIXES)
