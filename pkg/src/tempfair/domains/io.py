"""Plain-text instance files.

A file holds one or more instance blocks; each block starts with its
domain keyword on a line of its own (``cap``, ``vrp``, ``tap`` or
``nsp``).  Blank lines and ``#`` comments are ignored.  Several blocks in
one file form a multi-step plan (one instance per step).

CAP::

    cap
    q_max 4
    lecturers l1 l2 l3
    courses c1 c2
    skill l1 2 2
    skill l2 1.5 1.5
    skill l3 0 0
    unavailable l1          # optional

VRP (``point`` lines in index order; ``distance`` rows optional, Euclidean
otherwise)::

    vrp
    depot 0
    vehicles V1 V2
    point 10 10
    point 3 4

TAP (one ``cost`` row per agent)::

    tap
    agents a1 a2            # optional, default a1..an
    tasks t1 t2             # optional, default t1..tn
    cost 5 30
    cost 30 5

NSP (one ``nurse`` line: name, seniority, 10 preferences)::

    nsp
    q_max 15
    nurse n1 3 3 0 3 0 3 0 3 0 3 0
"""

from __future__ import annotations

from pathlib import Path

from .base import DomainInstance
from .cap import CapInstance
from .nsp import NspInstance
from .tap import TapInstance
from .vrp import VrpInstance

KEYWORDS = ("cap", "vrp", "tap", "nsp")


class FormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line


def _num(text: str) -> str:
    v = float(text)
    return repr(int(v)) if v.is_integer() and abs(v) < 2 ** 53 else repr(v)


def _fmt(v: float) -> str:
    return _num(repr(float(v)))


def dumps(instances) -> str:
    if isinstance(instances, DomainInstance):
        instances = [instances]
    blocks = []
    for inst in instances:
        blocks.append(_dump_one(inst))
    return "\n".join(blocks)


def _dump_one(inst: DomainInstance) -> str:
    out = [inst.domain]
    if isinstance(inst, CapInstance):
        out.append(f"q_max {_fmt(inst.q_max)}")
        out.append("lecturers " + " ".join(inst.lecturers))
        out.append("courses " + " ".join(inst.courses))
        for l, row in zip(inst.lecturers, inst.skill):
            out.append(f"skill {l} " + " ".join(_fmt(s) for s in row))
        if inst.unavailable:
            out.append("unavailable " + " ".join(l for l in inst.lecturers if l in inst.unavailable))
    elif isinstance(inst, VrpInstance):
        out.append(f"depot {inst.depot}")
        out.append("vehicles " + " ".join(inst.vehicles))
        for x, y in inst.coords:
            out.append(f"point {_fmt(x)} {_fmt(y)}")
        default = VrpInstance(inst.coords, inst.depot, inst.vehicles)
        if default.distance != inst.distance:
            for row in inst.distance:
                out.append("distance " + " ".join(_fmt(d) for d in row))
    elif isinstance(inst, TapInstance):
        out.append("agents " + " ".join(inst.agents))
        out.append("tasks " + " ".join(inst.tasks))
        for row in inst.cost:
            out.append("cost " + " ".join(_fmt(c) for c in row))
    elif isinstance(inst, NspInstance):
        out.append(f"q_max {_fmt(inst.q_max)}")
        for n, s, row in zip(inst.nurses, inst.seniority, inst.preference):
            out.append(f"nurse {n} {_fmt(s)} " + " ".join(str(p) for p in row))
    else:
        raise TypeError(f"no file format for {type(inst).__name__}")
    return "\n".join(out) + "\n"


def loads(text: str) -> list[DomainInstance]:
    blocks: list[tuple[str, int, list[tuple[int, list[str]]]]] = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1 and parts[0] in KEYWORDS:
            blocks.append((parts[0], no, []))
            continue
        if not blocks:
            raise FormatError(f"expected a domain keyword {KEYWORDS}, got {parts[0]!r}", no)
        blocks[-1][2].append((no, parts))
    if not blocks:
        raise FormatError("no instance found")
    return [_parse_block(kind, start, lines) for kind, start, lines in blocks]


def _floats(parts, no) -> list[float]:
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise FormatError(str(exc), no) from None


def _parse_block(kind: str, start: int, lines) -> DomainInstance:
    fields: dict[str, list] = {}
    for no, parts in lines:
        fields.setdefault(parts[0], []).append((no, parts[1:]))

    def single(key, default=None):
        items = fields.get(key)
        if not items:
            if default is None:
                raise FormatError(f"{kind}: missing '{key}'", start)
            return default
        if len(items) > 1:
            raise FormatError(f"{kind}: repeated '{key}'", items[1][0])
        return items[0][1]

    known = {"cap": {"q_max", "lecturers", "courses", "skill", "unavailable"},
             "vrp": {"depot", "vehicles", "point", "distance"},
             "tap": {"agents", "tasks", "cost"},
             "nsp": {"q_max", "nurse"}}[kind]
    for key, items in fields.items():
        if key not in known:
            raise FormatError(f"{kind}: unknown field '{key}'", items[0][0])
    try:
        if kind == "cap":
            lecturers = single("lecturers")
            courses = single("courses")
            skill = {}
            for no, parts in fields.get("skill", []):
                if not parts or parts[0] not in lecturers:
                    raise FormatError("skill line must start with a known lecturer", no)
                if len(parts) - 1 != len(courses):
                    raise FormatError(f"expected {len(courses)} skills", no)
                skill[parts[0]] = _floats(parts[1:], no)
            missing = [l for l in lecturers if l not in skill]
            if missing:
                raise FormatError(f"cap: no skill line for {missing}", start)
            q_max = _floats(single("q_max", ["1"]), start)[0]
            unavailable = fields.get("unavailable", [(start, [])])[0][1]
            return CapInstance(lecturers, courses, [skill[l] for l in lecturers], q_max,
                               frozenset(unavailable))
        if kind == "vrp":
            depot = int(single("depot", ["0"])[0])
            vehicles = single("vehicles")
            coords = []
            for no, parts in fields.get("point", []):
                if len(parts) != 2:
                    raise FormatError("point needs x and y", no)
                coords.append(tuple(_floats(parts, no)))
            dist = [(_floats(p, no)) for no, p in fields.get("distance", [])] or None
            return VrpInstance(tuple(coords), depot, tuple(vehicles), dist)
        if kind == "tap":
            rows = [_floats(p, no) for no, p in fields.get("cost", [])]
            n = len(rows)
            agents = single("agents", [f"a{i + 1}" for i in range(n)])
            tasks = single("tasks", [f"t{j + 1}" for j in range(n)])
            return TapInstance(agents, tasks, rows)
        nurses, sen, pref = [], [], []
        for no, parts in fields.get("nurse", []):
            if len(parts) != 12:
                raise FormatError("nurse line: name, seniority and 10 preferences", no)
            nurses.append(parts[0])
            sen.append(_floats(parts[1:2], no)[0])
            try:
                pref.append([int(p) for p in parts[2:]])
            except ValueError:
                raise FormatError("preferences must be integers", no) from None
        q_max = _floats(single("q_max", ["15"]), start)[0]
        return NspInstance(nurses, sen, pref, q_max)
    except FormatError:
        raise
    except ValueError as exc:
        raise FormatError(f"{kind}: {exc}", start) from None


def read(path) -> list[DomainInstance]:
    return loads(Path(path).read_text(encoding="utf-8"))


def write(path, instances) -> None:
    Path(path).write_text(dumps(instances), encoding="utf-8")
