"""Campaign orchestration: run the case sweeps, persist and replay certificates.

The result log is JSON-lines: a header record first, then one record per
case, appended as cases finish.  Append-only writing keeps the log usable
after a crash (a partial trailing line is tolerated on resume); sharded runs
on separate machines produce disjoint logs whose concatenation equals the
unsharded log up to ordering.
"""

from __future__ import annotations

import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import numpy as np

from ._version import __version__
from .enumeration import algorithm_b_cases
from .gfp import PRIME_LADDER
from .interpolation import Certificate, check_case, replay_certificate
from .model import (
    CaseSignature,
    VERDICT_INCONCLUSIVE,
    VERDICT_NON_SPECIAL,
    parse_system,
)

VERDICT_ERROR = "error"


@dataclass
class CampaignConfig:
    """Everything one sweep needs; identical configs replay identically."""

    degrees: tuple[int, int]
    out: Path
    primes: tuple[int, ...] = PRIME_LADDER
    base_seed: int = 0
    max_attempts: int = 3
    threads: Optional[int] = None
    shard: tuple[int, int] = (1, 1)
    resume: bool = False
    fundamental: bool = True

    def __post_init__(self):
        lo, hi = self.degrees
        if not (13 <= lo <= hi <= 40):
            raise ValueError(f"degrees must lie in [13, 40], got {self.degrees}")
        i, n = self.shard
        if not 1 <= i <= n:
            raise ValueError(f"shard must satisfy 1 <= i <= n, got {i}/{n}")
        if not self.primes or any(p <= 40 for p in self.primes):
            raise ValueError("prime ladder must be nonempty with every prime > 40")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be >= 1")
        self.out = Path(self.out)

    def effective_threads(self) -> int:
        return self.threads if self.threads else (os.cpu_count() or 1)

    def digest_fields(self) -> dict:
        return {
            "degrees": list(self.degrees),
            "primes": list(self.primes),
            "base_seed": self.base_seed,
            "max_attempts": self.max_attempts,
            "shard": list(self.shard),
            "fundamental": self.fundamental,
        }

    def digest(self) -> str:
        blob = json.dumps(self.digest_fields(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class CertRecord:
    case: CaseSignature
    index: int
    cert: Optional[Certificate]
    error: str = ""

    @property
    def verdict(self) -> str:
        return self.cert.verdict if self.cert else VERDICT_ERROR

    def to_line(self) -> str:
        body = {"case": list(self.case.key()), "index": self.index}
        if self.cert:
            body.update(self.cert.to_dict())
        else:
            body["error"] = self.error
        return json.dumps(body)

    @classmethod
    def from_dict(cls, data: dict) -> "CertRecord":
        case = CaseSignature(*data["case"])
        if "error" in data:
            return cls(case, int(data.get("index", -1)), None, data["error"])
        return cls(case, int(data.get("index", -1)), Certificate.from_dict(data))


def _scan_lines(path) -> Iterator[tuple[int, Optional[dict], str]]:
    """Yield (lineno, parsed record or None, error message) per log line."""
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                yield lineno, None, f"unparseable JSON: {exc}"
                continue
            if data.get("header"):
                continue
            if "case" not in data:
                yield lineno, None, "record missing 'case'"
                continue
            yield lineno, data, ""


class ResultStore:
    """In-memory index of certificate records, keyed by case identity."""

    def __init__(self):
        self._records: dict[tuple, CertRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, key) -> bool:
        return tuple(key) in self._records

    def add(self, record: CertRecord):
        key = record.case.key()
        if key in self._records:
            raise ValueError(f"duplicate record for case {key}")
        self._records[key] = record

    def records(self) -> list[CertRecord]:
        return list(self._records.values())

    def cases(self, d: int) -> list[tuple[CaseSignature, int, str]]:
        """Reduction-facing view: (signature, condition total, verdict)."""
        out = []
        for rec in self._records.values():
            if rec.case.degree == d:
                s = rec.cert.S if rec.cert else rec.case.conditions_total
                out.append((rec.case, s, rec.verdict))
        return out

    @classmethod
    def load(cls, path) -> "ResultStore":
        """Strict load: raises on corrupt interior lines or duplicates.

        A truncated final line (crash artifact) is tolerated and ignored.
        """
        store = cls()
        entries = list(_scan_lines(path))
        for pos, (lineno, data, err) in enumerate(entries):
            if err:
                if pos == len(entries) - 1:
                    continue  # partial trailing write from a killed run
                raise ValueError(f"{path}:{lineno}: {err}")
            store.add(CertRecord.from_dict(data))
        return store


def _shard_indices(n_cases: int, shard: tuple[int, int]) -> list[int]:
    i, n = shard
    return [idx for idx in range(n_cases) if idx % n == i - 1]


def run_campaign(config: CampaignConfig) -> dict:
    """Sweep every degree in range, appending certificates to the log.

    Within a degree the largest matrices start first to limit tail latency.
    Returns a summary with per-degree counts; any inconclusive or failed case
    is surfaced there and must be treated as a red flag.
    """
    out = config.out
    out.parent.mkdir(parents=True, exist_ok=True)
    done = ResultStore()
    if out.exists() and out.stat().st_size > 0:
        if not config.resume:
            raise FileExistsError(f"{out} exists; pass resume to continue into it")
        done = ResultStore.load(out)
    else:
        with open(out, "a") as fh:
            header = {
                "header": True,
                "version": __version__,
                "numpy": np.__version__,
                "digest": config.digest(),
                "config": config.digest_fields(),
            }
            fh.write(json.dumps(header) + "\n")

    lo, hi = config.degrees
    threads = config.effective_threads()
    summary = {
        "degrees": {},
        "computed": 0,
        "inconclusive": 0,
        "errors": 0,
        "shard": list(config.shard),
    }

    def run_one(idx: int, case: CaseSignature) -> CertRecord:
        seed = config.base_seed + idx * config.max_attempts
        try:
            cert = check_case(
                case.to_system(),
                prime=config.primes[0],
                seed=seed,
                max_attempts=config.max_attempts,
                fundamental=config.fundamental,
            )
            return CertRecord(case, idx, cert)
        except MemoryError as exc:  # pragma: no cover - depends on host RAM
            return CertRecord(case, idx, None, f"out of memory: {exc}")
        except Exception as exc:
            return CertRecord(case, idx, None, f"{type(exc).__name__}: {exc}")

    with open(out, "a") as fh:
        for d in range(lo, hi + 1):
            cases = algorithm_b_cases(d)
            mine = _shard_indices(len(cases), config.shard)
            todo = [
                (idx, cases[idx])
                for idx in mine
                if cases[idx].key() not in done
            ]
            # biggest condition totals first
            todo.sort(key=lambda pair: (-pair[1].conditions_total, pair[0]))
            stats = {"expected": len(mine), "done": len(mine) - len(todo),
                     VERDICT_NON_SPECIAL: 0, VERDICT_INCONCLUSIVE: 0, VERDICT_ERROR: 0}
            for case, _, verdict in done.cases(d):
                stats[verdict] = stats.get(verdict, 0) + 1
            with ThreadPoolExecutor(max_workers=threads) as pool:
                futures = {pool.submit(run_one, idx, case): idx for idx, case in todo}
                for fut in as_completed(futures):
                    record = fut.result()
                    fh.write(record.to_line() + "\n")
                    fh.flush()
                    done.add(record)
                    stats[record.verdict] = stats.get(record.verdict, 0) + 1
                    summary["computed"] += 1
            stats["done"] = stats[VERDICT_NON_SPECIAL] + stats[VERDICT_INCONCLUSIVE] + stats[VERDICT_ERROR]
            summary["degrees"][d] = stats
            summary["inconclusive"] += stats[VERDICT_INCONCLUSIVE]
            summary["errors"] += stats[VERDICT_ERROR]
    summary["ok"] = summary["inconclusive"] == 0 and summary["errors"] == 0
    return summary


@dataclass
class VerifyReport:
    total: int = 0
    replayed: int = 0
    mismatches: list = field(default_factory=list)
    corrupt: list = field(default_factory=list)
    structural: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.mismatches or self.corrupt or self.structural)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "replayed": self.replayed,
            "mismatches": self.mismatches,
            "corrupt": self.corrupt,
            "structural": self.structural,
            "ok": self.ok,
        }


def verify_log(path, full: bool = False) -> VerifyReport:
    """Validate a result log and replay certificates against fresh ranks.

    Every record is checked structurally (N, S recomputed from the system,
    verdict consistent with the recorded rank, case identity matching the
    spec, no duplicates).  Ranks are recomputed for every record with
    full=True, else for a deterministic evenly-spaced sample.
    """
    report = VerifyReport()
    seen: set[tuple] = set()
    records: list[tuple[int, CertRecord]] = []
    for lineno, data, err in _scan_lines(path):
        if err:
            report.corrupt.append({"line": lineno, "error": err})
            continue
        try:
            record = CertRecord.from_dict(data)
        except Exception as exc:
            report.corrupt.append({"line": lineno, "error": f"bad record: {exc}"})
            continue
        key = record.case.key()
        if key in seen:
            report.corrupt.append({"line": lineno, "error": f"duplicate case {key}"})
            continue
        seen.add(key)
        records.append((lineno, record))
    report.total = len(records)

    checkable = []
    for lineno, record in records:
        if record.cert is None:
            continue
        cert = record.cert
        try:
            spec = parse_system(cert.spec)
        except ValueError as exc:
            report.structural.append({"line": lineno, "error": f"bad spec: {exc}"})
            continue
        problems = []
        if CaseSignature.from_system(spec).key() != record.case.key():
            problems.append("case identity does not match spec")
        if spec.n_monomials != cert.N:
            problems.append(f"N mismatch: {spec.n_monomials} != {cert.N}")
        if spec.conditions_total != cert.S:
            problems.append(f"S mismatch: {spec.conditions_total} != {cert.S}")
        maximal = cert.rank == min(cert.N, cert.S)
        if (cert.verdict == VERDICT_NON_SPECIAL) != maximal:
            problems.append(f"verdict {cert.verdict} inconsistent with rank {cert.rank}")
        if problems:
            report.structural.append({"line": lineno, "error": "; ".join(problems)})
            continue
        checkable.append((lineno, record))

    if checkable:
        if full:
            picked = checkable
        else:
            want = min(len(checkable), max(10, len(checkable) // 10))
            step = max(1, len(checkable) // want)
            picked = checkable[::step][:want]
        for lineno, record in picked:
            got = replay_certificate(record.cert)
            report.replayed += 1
            if got != record.cert.rank:
                report.mismatches.append(
                    {
                        "line": lineno,
                        "case": list(record.case.key()),
                        "recorded_rank": record.cert.rank,
                        "replayed_rank": got,
                    }
                )
    return report


def status(path, degrees: tuple[int, int]) -> list[dict]:
    """Per-degree progress against the enumerator's expected totals."""
    store = ResultStore()
    if path and Path(path).exists():
        store = ResultStore.load(path)
    rows = []
    for d in range(degrees[0], degrees[1] + 1):
        expected = len(algorithm_b_cases(d))
        recs = store.cases(d)
        non_special = sum(1 for _, _, v in recs if v == VERDICT_NON_SPECIAL)
        inconclusive = sum(1 for _, _, v in recs if v == VERDICT_INCONCLUSIVE)
        errors = sum(1 for _, _, v in recs if v == VERDICT_ERROR)
        rows.append(
            {
                "degree": d,
                "expected": expected,
                "done": len(recs),
                "non_special": non_special,
                "inconclusive": inconclusive,
                "errors": errors,
                "pending": expected - len(recs),
            }
        )
    return rows
