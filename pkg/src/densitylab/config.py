"""Plain-text config parsing: cube/liquid catalogs, the question bank,
response files, and the display string table.

Catalog, bank, and response files share one line format: a record kind
followed by ``key=value`` fields, with ``#`` starting a comment. Values
never contain whitespace. Numbers are parsed with ``float``/``int`` so the
same text always yields the same bits.

    liquid id=water name=water density_g_cm3=1.0
    cube id=A stage=c1 volume_cm3=1000 mass_g=500
    question id=q01 prompt_key=q01_prompt options=q01_a,q01_b correct_index=1
    response participant_id=p1 question_id=q01 chosen_index=1 confidence=3

The string table uses ``key = text`` lines because its values are prose.
"""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .assessment import Question, QuestionBank, Response
from .physics import Cube, Liquid
from .telemetry import StageId

CONFIG_DIR_ENV = "DENSITYLAB_CONFIG_DIR"
DEFAULT_CATALOG_FILE = "default_catalog.txt"
DEFAULT_BANK_FILE = "question_bank.txt"
DEFAULT_STRINGS_FILE = "strings_en.txt"

STAGES_WITH_OWN_CUBES = (StageId.TRAINING, StageId.C1, StageId.C2)
REQUIRED_LIQUIDS = ("water", "oil", "quicksilver")


class ConfigError(Exception):
    """Unparseable or invalid config data; message carries file:line."""


def _parse_records(text: str, source: str) -> list[tuple[int, str, dict[str, str]]]:
    records = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = []
        for token in line.split():
            if token.startswith("#"):
                break
            tokens.append(token)
        if not tokens:
            continue
        kind, fields = tokens[0], {}
        for token in tokens[1:]:
            if "=" not in token:
                raise ConfigError(f"{source}:{lineno}: expected key=value, got {token!r}")
            key, value = token.split("=", 1)
            if key in fields:
                raise ConfigError(f"{source}:{lineno}: duplicate field {key!r}")
            fields[key] = value
        records.append((lineno, kind, fields))
    return records


def _field(fields: dict[str, str], key: str, source: str, lineno: int) -> str:
    if key not in fields:
        raise ConfigError(f"{source}:{lineno}: missing field {key!r}")
    return fields[key]


def _float_field(fields: dict[str, str], key: str, source: str, lineno: int) -> float:
    raw = _field(fields, key, source, lineno)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{source}:{lineno}: {key} is not a number: {raw!r}") from exc


def _int_field(fields: dict[str, str], key: str, source: str, lineno: int) -> int:
    raw = _field(fields, key, source, lineno)
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"{source}:{lineno}: {key} is not an integer: {raw!r}") from exc


class CatalogConfig:
    """Parsed cube catalog: liquids by id, cubes grouped by owning stage."""

    def __init__(self, liquids: dict[str, Liquid], cubes: dict[StageId, list[Cube]]):
        self.liquids = liquids
        self.cubes = cubes


def parse_catalog(text: str, source: str = "<catalog>") -> CatalogConfig:
    liquids: dict[str, Liquid] = {}
    cubes: dict[StageId, list[Cube]] = {stage: [] for stage in STAGES_WITH_OWN_CUBES}
    for lineno, kind, fields in _parse_records(text, source):
        if kind == "liquid":
            liquid_id = _field(fields, "id", source, lineno)
            if liquid_id in liquids:
                raise ConfigError(f"{source}:{lineno}: duplicate liquid {liquid_id!r}")
            try:
                liquids[liquid_id] = Liquid(
                    id=liquid_id,
                    name=fields.get("name", liquid_id),
                    density=_float_field(fields, "density_g_cm3", source, lineno),
                )
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        elif kind == "cube":
            cube_id = _field(fields, "id", source, lineno)
            stage_raw = _field(fields, "stage", source, lineno)
            try:
                stage = StageId(stage_raw)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: unknown stage {stage_raw!r}") from exc
            if stage not in cubes:
                raise ConfigError(
                    f"{source}:{lineno}: cubes belong to training/c1/c2 (c3 and bonus reuse the c1 set)"
                )
            try:
                cube = Cube(
                    id=cube_id,
                    volume=_float_field(fields, "volume_cm3", source, lineno),
                    mass=_float_field(fields, "mass_g", source, lineno),
                )
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: {exc}") from exc
            if any(existing.id == cube_id for stage_cubes in cubes.values() for existing in stage_cubes):
                raise ConfigError(f"{source}:{lineno}: duplicate cube {cube_id!r}")
            cubes[stage].append(cube)
        else:
            raise ConfigError(f"{source}:{lineno}: unknown record kind {kind!r}")

    for liquid_id in REQUIRED_LIQUIDS:
        if liquid_id not in liquids:
            raise ConfigError(f"{source}: missing required liquid {liquid_id!r}")
    if liquids["water"].density != 1.0:
        raise ConfigError(f"{source}: water density must be exactly 1.0 (reference liquid)")
    for stage in STAGES_WITH_OWN_CUBES:
        if not cubes[stage]:
            raise ConfigError(f"{source}: no cubes defined for stage {stage.value}")
    _validate_stage_sets(cubes, source)
    return CatalogConfig(liquids=liquids, cubes=cubes)


def _validate_stage_sets(cubes: dict[StageId, list[Cube]], source: str) -> None:
    c1 = cubes[StageId.C1]
    volumes = {cube.volume for cube in c1}
    masses = [cube.mass for cube in c1]
    if len(volumes) != 1:
        raise ConfigError(f"{source}: c1 cubes must all share one volume")
    if len(set(masses)) != len(masses):
        raise ConfigError(f"{source}: c1 cube masses must be pairwise distinct")
    c2 = cubes[StageId.C2]
    masses2 = {cube.mass for cube in c2}
    volumes2 = [cube.volume for cube in c2]
    if len(masses2) != 1:
        raise ConfigError(f"{source}: c2 cubes must all share one mass")
    if len(set(volumes2)) != len(volumes2):
        raise ConfigError(f"{source}: c2 cube volumes must be pairwise distinct")
    for stage, stage_cubes in cubes.items():
        by_density = sorted(stage_cubes, key=lambda cube: cube.mass / cube.volume)
        dots = [cube.dot_level for cube in by_density]
        if dots != sorted(dots):
            raise ConfigError(f"{source}: dot levels not monotone in density for stage {stage.value}")


def load_catalog(path: str | Path) -> CatalogConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read catalog {path}: {exc}") from exc
    return parse_catalog(text, source=str(path))


def parse_question_bank(text: str, source: str = "<bank>") -> QuestionBank:
    questions = []
    for lineno, kind, fields in _parse_records(text, source):
        if kind != "question":
            raise ConfigError(f"{source}:{lineno}: unknown record kind {kind!r}")
        options = tuple(opt for opt in _field(fields, "options", source, lineno).split(",") if opt)
        try:
            questions.append(
                Question(
                    id=_field(fields, "id", source, lineno),
                    prompt_key=_field(fields, "prompt_key", source, lineno),
                    options=options,
                    correct_index=_int_field(fields, "correct_index", source, lineno),
                )
            )
        except Exception as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
    try:
        return QuestionBank(questions)
    except Exception as exc:
        raise ConfigError(f"{source}: {exc}") from exc


def load_question_bank(path: str | Path) -> QuestionBank:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read bank {path}: {exc}") from exc
    return parse_question_bank(text, source=str(path))


def parse_responses(text: str, source: str = "<responses>") -> dict[str, list[Response]]:
    """Responses grouped by participant, in file order."""
    grouped: dict[str, list[Response]] = {}
    for lineno, kind, fields in _parse_records(text, source):
        if kind != "response":
            raise ConfigError(f"{source}:{lineno}: unknown record kind {kind!r}")
        participant = _field(fields, "participant_id", source, lineno)
        try:
            response = Response(
                question_id=_field(fields, "question_id", source, lineno),
                chosen_index=_int_field(fields, "chosen_index", source, lineno),
                confidence=_int_field(fields, "confidence", source, lineno),
            )
        except Exception as exc:
            raise ConfigError(f"{source}:{lineno}: {exc}") from exc
        grouped.setdefault(participant, []).append(response)
    return grouped


def load_responses(path: str | Path) -> dict[str, list[Response]]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read responses {path}: {exc}") from exc
    return parse_responses(text, source=str(path))


def parse_strings(text: str, source: str = "<strings>") -> dict[str, str]:
    table: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = text'")
        key, value = line.split("=", 1)
        key = key.strip()
        if key in table:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        table[key] = value.strip()
    return table


def load_strings(path: str | Path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read strings {path}: {exc}") from exc
    return parse_strings(text, source=str(path))


def config_dir() -> Path | None:
    """Directory for default config files, from $DENSITYLAB_CONFIG_DIR if set."""
    override = os.environ.get(CONFIG_DIR_ENV)
    return Path(override) if override else None


def _default_path(filename: str) -> Path:
    directory = config_dir()
    if directory is not None:
        candidate = directory / filename
        if candidate.exists():
            return candidate
    return Path(str(resources.files("densitylab").joinpath("data", filename)))


def default_catalog() -> CatalogConfig:
    return load_catalog(_default_path(DEFAULT_CATALOG_FILE))


def default_question_bank() -> QuestionBank:
    return load_question_bank(_default_path(DEFAULT_BANK_FILE))


def default_strings() -> dict[str, str]:
    return load_strings(_default_path(DEFAULT_STRINGS_FILE))
