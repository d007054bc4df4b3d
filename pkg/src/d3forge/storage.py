"""Canonical JSON Lines persistence and atomic file writes.

Every record is written as compact JSON with a fixed key order, one per
line, each line ending in a newline. Scene coordinates always carry
exactly four decimals. Reading a canonical file and writing it back
reproduces it byte for byte.
"""

import csv
import io
import json
import os
import tempfile
from contextlib import contextmanager

from .errors import D3Error, DataError, SchemaError
from .evaluation import PredictionRecord
from .questions import QuestionRecord
from .scene import COORD_DIGITS, ObjectSpec, Scene

SCENE_KEYS = ("id", "condition", "objects")
OBJECT_KEYS = ("color", "size", "shape", "material", "x", "y")


def dumps(obj):
    return json.dumps(obj, separators=(",", ":"))


@contextmanager
def atomic_writer(path, newline=None):
    """Text handle whose contents appear at ``path`` only after a clean close."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".tmp-", dir=directory)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline=newline) as fh:
            yield fh
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_lines(lines, path):
    with atomic_writer(path, newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def iter_json_lines(path):
    """``(line_number, object)`` pairs; malformed or unterminated lines are data errors."""
    with open(path, encoding="utf-8", newline="") as fh:
        for number, line in enumerate(fh, 1):
            if not line.endswith("\n"):
                raise DataError(f"{path}: line {number} is not newline-terminated (truncated file?)")
            try:
                yield number, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}: line {number}: malformed JSON ({exc.msg})") from exc


def _parse_lines(path, parse):
    for number, obj in iter_json_lines(path):
        try:
            yield parse(obj)
        except D3Error as exc:
            raise type(exc)(f"{path}: line {number}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"{path}: line {number}: {exc}") from exc


# questions

def question_line(record):
    return dumps(record.to_json())


def iter_dataset(path):
    return _parse_lines(path, QuestionRecord.from_json)


def read_dataset(path):
    return list(iter_dataset(path))


def write_dataset(records, path):
    write_lines((question_line(r) for r in records), path)


# scenes

def _coord(value):
    return f"{value:.{COORD_DIGITS}f}"


def scene_line(scene):
    objects = ",".join(
        "{" + ",".join(
            [f'"{k}":{dumps(getattr(o, k))}' for k in OBJECT_KEYS[:4]]
            + [f'"x":{_coord(o.x)}', f'"y":{_coord(o.y)}']
        ) + "}"
        for o in scene.objects
    )
    return f'{{"id":{dumps(scene.id)},"condition":{dumps(scene.condition)},"objects":[{objects}]}}'


def scene_from_json(data):
    if not isinstance(data, dict) or set(data) != set(SCENE_KEYS):
        raise SchemaError(f"scene needs exactly the keys {list(SCENE_KEYS)}")
    objects = []
    for o in data["objects"]:
        if not isinstance(o, dict) or set(o) != set(OBJECT_KEYS):
            raise SchemaError(f"object needs exactly the keys {list(OBJECT_KEYS)}")
        if not all(isinstance(o[k], (int, float)) and not isinstance(o[k], bool) for k in ("x", "y")):
            raise SchemaError("object coordinates must be numbers")
        objects.append(ObjectSpec(o["color"], o["size"], o["shape"], o["material"], float(o["x"]), float(o["y"])))
    return Scene(data["id"], data["condition"], tuple(objects))


def iter_scenes(path):
    return _parse_lines(path, scene_from_json)


def read_scenes(path):
    return list(iter_scenes(path))


def write_scenes(scenes, path):
    write_lines((scene_line(s) for s in scenes), path)


# predictions

def read_predictions(path):
    return list(_parse_lines(path, PredictionRecord.from_json))


def write_predictions(preds, path):
    write_lines((dumps(p.to_json()) for p in preds), path)


# reports

def write_json(obj, path):
    with atomic_writer(path, newline="\n") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def read_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON at line {exc.lineno} ({exc.msg})") from exc


def csv_text(rows):
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def write_csv(rows, path):
    with atomic_writer(path, newline="") as fh:
        fh.write(csv_text(rows))
