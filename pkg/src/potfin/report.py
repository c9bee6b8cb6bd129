"""Law reports: one verdict per law, with a concrete counterexample on failure."""
from __future__ import annotations

import enum
import json
import numbers
from dataclasses import dataclass, field
from typing import Any

SCHEMA_VERSION = 1


class Verdict(str, enum.Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"
    UNKNOWN = "unknown-at-bound"


@dataclass
class LawResult:
    law: str
    anchor: str
    verdict: Verdict
    counterexample: dict[str, Any] | None = None
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"law": self.law, "anchor": self.anchor, "verdict": self.verdict.value}
        if self.counterexample is not None:
            out["counterexample"] = self.counterexample
        if self.detail:
            out["detail"] = self.detail
        return out

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LawResult":
        return cls(d["law"], d["anchor"], Verdict(d["verdict"]), d.get("counterexample"), d.get("detail", ""))


@dataclass
class LawReport:
    structure: str
    bound: Any
    results: list[LawResult] = field(default_factory=list)
    meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        # keep everything in JSON shape so that emit/parse is the identity
        self.bound = _jsonable(self.bound)
        self.meta = _jsonable(self.meta)

    def add(self, law: str, anchor: str, counterexample: dict | None = None, *,
            verdict: Verdict | None = None, detail: str = "") -> LawResult:
        if verdict is None:
            verdict = Verdict.PASS if counterexample is None else Verdict.FAIL
        if verdict is Verdict.FAIL and counterexample is None:
            raise ValueError(f"failing verdict for {law} needs a counterexample")
        if counterexample is not None:
            counterexample = _jsonable(counterexample)
        res = LawResult(law, anchor, verdict, counterexample, detail)
        self.results.append(res)
        return res

    def extend(self, other: "LawReport") -> "LawReport":
        self.results.extend(other.results)
        for k, v in other.meta.items():
            self.meta.setdefault(k, v)
        return self

    def __getitem__(self, law: str) -> LawResult:
        for r in self.results:
            if r.law == law:
                return r
        raise KeyError(law)

    def __contains__(self, law: str) -> bool:
        return any(r.law == law for r in self.results)

    def verdict(self, law: str) -> Verdict:
        return self[law].verdict

    @property
    def failures(self) -> list[LawResult]:
        return [r for r in self.results if r.verdict is Verdict.FAIL]

    @property
    def ok(self) -> bool:
        return not self.failures

    def sorted(self) -> "LawReport":
        return LawReport(self.structure, self.bound, sorted(self.results, key=lambda r: r.law), dict(self.meta))

    def to_dict(self) -> dict[str, Any]:
        return {
            "v": SCHEMA_VERSION,
            "structure": self.structure,
            "bound": self.bound,
            "meta": self.meta,
            "results": [r.to_dict() for r in self.results],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, **kw)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "LawReport":
        if d.get("v") != SCHEMA_VERSION:
            raise ValueError(f"unsupported report version {d.get('v')!r}")
        return cls(d["structure"], d["bound"], [LawResult.from_dict(r) for r in d["results"]], d.get("meta", {}))

    @classmethod
    def from_json(cls, text: str) -> "LawReport":
        return cls.from_dict(json.loads(text))

    def to_text(self) -> str:
        lines = [f"{self.structure} @ bound {self.bound}"]
        for k, v in self.meta.items():
            lines.append(f"  # {k}: {v}")
        for r in self.results:
            line = f"  [{r.verdict.value:>16}] {r.law:<10} {r.anchor}"
            if r.detail:
                line += f"  ({r.detail})"
            lines.append(line)
            if r.counterexample is not None:
                lines.append(f"  {'':>18} counterexample: {json.dumps(_jsonable(r.counterexample), ensure_ascii=False)}")
        return "\n".join(lines)


def _jsonable(x: Any) -> Any:
    """Tuples become lists so that a JSON round trip is the identity."""
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (str, bool)) or x is None:
        return x
    if isinstance(x, numbers.Integral):
        return int(x)
    if isinstance(x, float):
        return float(x)
    return str(x)
