import time

import pytest

from robust_pmp.config import TABLE_PRESETS, preset
from robust_pmp.spacecraft import simulate

_SOLVED = {}
# criterion number -> list of (label, passed, detail)
ACCEPTANCE = {}


def solved(name: str):
    """(solution, wall time) for a preset, solved once per session."""
    if name not in _SOLVED:
        cfg = preset(name)
        t0 = time.perf_counter()
        sol = simulate(cfg.params, cfg.guess, cfg.solver)
        _SOLVED[name] = (sol, time.perf_counter() - t0)
    return _SOLVED[name]


@pytest.fixture(params=TABLE_PRESETS)
def table_solution(request):
    return request.param, solved(request.param)[0]


def record(criterion: int, label: str, passed: bool, detail: str) -> bool:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(passed), detail))
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion} {label}: {detail}")
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(passed for _, passed, _ in checks)
        failed = [f"{label} ({detail})" for label, passed, detail in checks if not passed]
        tail = f" failing: {'; '.join(failed)}" if failed else f" {len(checks)} check(s)"
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}:{tail}")
