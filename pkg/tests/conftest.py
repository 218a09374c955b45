import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "channel soundness",
    2: "simulator oracle equivalence",
    3: "transpiler correctness",
    4: "QAOA saturation",
    5: "QAOA threshold",
    6: "model ordering",
    7: "VQLS noiseless convergence",
    8: "determinism",
    9: "NIBP gradient trend",
}

_results: dict[int, dict[str, tuple[bool, str]]] = {}


@pytest.fixture
def acceptance():
    """record(criterion, passed, detail, part) for the end-of-run summary.

    A criterion with several parts passes only when every recorded part does.
    """

    def record(criterion: int, passed: bool, detail: str = "", part: str = "") -> bool:
        _results.setdefault(criterion, {})[part] = (bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid, name in CRITERIA.items():
        if cid in _results:
            parts = _results[cid]
            ok = all(p[0] for p in parts.values())
            status = "PASS" if ok else "FAIL"
            detail = "; ".join((f"{k}: " if k else "") + d for k, (_, d) in sorted(parts.items()) if d)
        else:
            status, detail = "NOT RUN", ""
        tr.write_line(f"[{status}] {cid}. {name}" + (f": {detail}" if detail else ""))
