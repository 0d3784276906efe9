"""Scenario config files: one ``key = value`` per line, ``#`` starts a comment.

Keys::

    total_rate = 2            # required, sum of server rates
    horizon = 1000            # required, seconds
    seed = 7                  # optional, default 0
    classes[i].rate           # arrival rate (required)
    classes[i].reward         # required
    classes[i].cost           # waiting cost per second (required)
    classes[i].size           # fixed:1 (default) | exp:<mean> |
                              # twopoint:<a>,<b>,<p> | empirical:<v1>,<v2>,...
    classes[i].arrivals       # poisson (default) | fixed
    classes[i].id             # optional, default i
    servers[j].rate           # required
    servers[j].toll           # required

Indices start at 0 and must be contiguous.
"""

from __future__ import annotations

import re
from pathlib import Path

from .model import (
    ClassSpec, EmpiricalSize, ExponentialSize, FixedSize, Scenario, ServerSpec,
    SystemSpec, TwoPointSize, validate,
)

_INDEXED = re.compile(r"^(classes|servers)\[(\d+)\]\.([a-z_]+)$")
_TOP = {"total_rate": float, "horizon": float, "seed": int}
_CLASS_KEYS = {"rate": float, "reward": float, "cost": float, "size": str,
               "arrivals": str, "id": int}
_SERVER_KEYS = {"rate": float, "toll": float}


class ConfigError(ValueError):
    pass


def parse_size(text: str):
    kind, _, args = text.partition(":")
    kind = kind.strip().lower()
    try:
        nums = [float(x) for x in args.split(",")] if args.strip() else []
    except ValueError:
        raise ValueError(f"bad size parameters in {text!r}") from None
    if kind == "fixed" and len(nums) <= 1:
        return FixedSize(nums[0] if nums else 1.0)
    if kind in ("exp", "exponential") and len(nums) == 1:
        return ExponentialSize(nums[0])
    if kind == "twopoint" and len(nums) == 3:
        return TwoPointSize(*nums)
    if kind == "empirical" and nums:
        return EmpiricalSize(tuple(nums))
    raise ValueError(f"unrecognised size model {text!r}")


def format_size(model) -> str:
    g = lambda x: format(x, ".17g")  # noqa: E731
    if isinstance(model, FixedSize):
        return f"fixed:{g(model.size)}"
    if isinstance(model, ExponentialSize):
        return f"exp:{g(model.mean)}"
    if isinstance(model, TwoPointSize):
        return f"twopoint:{g(model.a)},{g(model.b)},{g(model.p)}"
    return "empirical:" + ",".join(g(v) for v in model.values)


def _convert(kind, raw: str, where: str):
    try:
        if kind is int:
            return int(raw, 0)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        name = "an integer" if kind is int else "a number"
        raise ConfigError(f"{where}: expected {name}, got {raw!r}") from None


def parse_scenario(text: str, source: str = "<scenario>") -> Scenario:
    top: dict = {}
    groups: dict[str, dict[int, dict]] = {"classes": {}, "servers": {}}
    lines: dict[str, int] = {}

    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}"
        key, eq, raw = body.partition("=")
        key, raw = key.strip(), raw.strip()
        if not eq or not key:
            raise ConfigError(f"{where}: expected 'key = value'")
        if key in lines:
            raise ConfigError(f"{where}: duplicate key {key!r} (first set on line {lines[key]})")
        lines[key] = lineno
        if key in _TOP:
            top[key] = _convert(_TOP[key], raw, f"{where}: {key}")
            continue
        m = _INDEXED.match(key)
        allowed = (_CLASS_KEYS if m and m.group(1) == "classes" else _SERVER_KEYS)
        if not m or m.group(3) not in allowed:
            raise ConfigError(f"{where}: unknown key {key!r}")
        group, idx, name = m.group(1), int(m.group(2)), m.group(3)
        value = _convert(allowed[name], raw, f"{where}: {key}")
        if name == "size":
            try:
                value = parse_size(value)
            except ValueError as exc:
                raise ConfigError(f"{where}: {key}: {exc}") from None
        groups[group].setdefault(idx, {})[name] = value

    def line_of(path: str) -> str:
        return f"{source}:{lines[path]}" if path in lines else source

    for key in ("total_rate", "horizon"):
        if key not in top:
            raise ConfigError(f"{source}: missing required key {key!r}")

    def entries(group, required):
        found = groups[group]
        if sorted(found) != list(range(len(found))):
            raise ConfigError(f"{source}: {group} indices must be contiguous from 0, got {sorted(found)}")
        for i in range(len(found)):
            for r in required:
                if r not in found[i]:
                    raise ConfigError(f"{source}: missing required key '{group}[{i}].{r}'")
        return [found[i] for i in range(len(found))]

    classes = tuple(
        ClassSpec(id=e.get("id", i), arrival_rate=e["rate"], reward=e["reward"],
                  waiting_cost=e["cost"], size_model=e.get("size", FixedSize(1.0)),
                  arrival_process=e.get("arrivals", "poisson"))
        for i, e in enumerate(entries("classes", ("rate", "reward", "cost")))
    )
    servers = tuple(ServerSpec(e["rate"], e["toll"])
                    for e in entries("servers", ("rate", "toll")))
    scenario = Scenario(classes, SystemSpec(servers, top["total_rate"]),
                        top["horizon"], top.get("seed", 0))

    result = validate(scenario)
    if not result.ok:
        msgs = [f"{line_of(v.path)}: {v}" for v in result.violations]
        raise ConfigError("invalid scenario:\n  " + "\n  ".join(msgs))
    return scenario


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {str(path)!r}: {exc.strerror}") from None
    return parse_scenario(text, str(path))


def dump_scenario(scenario: Scenario) -> str:
    g = lambda x: format(x, ".17g")  # noqa: E731
    out = [f"total_rate = {g(scenario.system.total_rate)}",
           f"horizon = {g(scenario.horizon)}",
           f"seed = {scenario.seed}"]
    for i, c in enumerate(scenario.classes):
        out += [f"classes[{i}].id = {c.id}",
                f"classes[{i}].rate = {g(c.arrival_rate)}",
                f"classes[{i}].reward = {g(c.reward)}",
                f"classes[{i}].cost = {g(c.waiting_cost)}",
                f"classes[{i}].size = {format_size(c.size_model)}",
                f"classes[{i}].arrivals = {c.arrival_process}"]
    for j, s in enumerate(scenario.system.servers):
        out += [f"servers[{j}].rate = {g(s.rate)}", f"servers[{j}].toll = {g(s.toll)}"]
    return "\n".join(out) + "\n"
