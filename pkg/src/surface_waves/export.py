"""
Config files and CSV output.

Every CSV starts with `#` comment lines carrying the run manifest, then the
column header row, then data rows written with repr() precision.
"""

import csv
import io
import json
import logging
import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Optional, Sequence, TextIO, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from .core import MediumConfig
from .errors import ConfigError

logger = logging.getLogger(__name__)

MANIFEST_PREFIX = "# manifest: "


class RunManifest(BaseModel):
    """Provenance of one CLI run, embedded in every output file"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    config_path: Optional[str] = None
    command: str
    overrides: List[str] = Field(default_factory=list)
    outputs: List[str] = Field(default_factory=list)
    tool_version: str = __version__
    timestamp: Optional[str] = None

    @classmethod
    def create(
        cls,
        command: str,
        config_path: Optional[str] = None,
        overrides: Sequence[str] = (),
        outputs: Sequence[str] = (),
        stamp: bool = True,
    ) -> "RunManifest":
        return cls(
            config_path=config_path,
            command=command,
            overrides=list(overrides),
            outputs=list(outputs),
            timestamp=datetime.now().isoformat(timespec="seconds") if stamp else None,
        )


def _parse_override_value(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(raw: Dict[str, Any], assignment: str) -> None:
    """Apply one dotted `a.b=value` assignment to a raw config dict in place"""
    if "=" not in assignment:
        raise ConfigError(f"override must look like key=value, got {assignment!r}")
    path, text = assignment.split("=", 1)
    keys = [k for k in path.strip().split(".") if k]
    if not keys:
        raise ConfigError(f"empty override key in {assignment!r}")
    node = raw
    for key in keys[:-1]:
        child = node.setdefault(key, {})
        if not isinstance(child, dict):
            raise ConfigError(f"override {assignment!r} descends into non-object key {key!r}")
        node = child
    node[keys[-1]] = _parse_override_value(text.strip())


def _merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(path: Optional[str] = None, overrides: Sequence[str] = ()) -> MediumConfig:
    """Read a JSON config over the defaults, apply overrides, validate"""
    loaded: Dict[str, Any] = {}
    if path:
        try:
            loaded = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {path} is not valid JSON: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must hold a JSON object")

    # nested overrides land on complete default sections
    raw = _merge(MediumConfig().model_dump(mode="json"), loaded)
    for assignment in overrides:
        apply_override(raw, assignment)

    try:
        return MediumConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e


def dump_config(cfg: MediumConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2) + "\n"


@contextmanager
def open_output(path: Optional[str]) -> Iterator[TextIO]:
    """UTF-8, LF-only output file, or stdout for None / '-'"""
    if path is None or path == "-":
        yield sys.stdout
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="\n") as stream:
        yield stream


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(
    stream: TextIO,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    manifest: Optional[RunManifest] = None,
) -> int:
    """Write manifest comment, header and rows; returns the number of data rows"""
    if manifest is not None:
        stream.write(MANIFEST_PREFIX + manifest.model_dump_json() + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    count = 0
    for row in rows:
        writer.writerow([_cell(v) for v in row])
        count += 1
    return count


def read_csv(text: str) -> Tuple[Dict[str, Any], List[str], List[List[float]]]:
    """Parse an output file back into (manifest, columns, numeric rows)"""
    manifest: Dict[str, Any] = {}
    body = []
    for line in text.splitlines():
        if line.startswith(MANIFEST_PREFIX):
            manifest = json.loads(line[len(MANIFEST_PREFIX):])
        elif line.startswith("#"):
            continue
        elif line:
            body.append(line)
    if not body:
        return manifest, [], []
    reader = csv.reader(io.StringIO("\n".join(body)))
    columns = next(reader)
    rows = [[float(cell) for cell in row] for row in reader]
    return manifest, columns, rows
