"""Shared test plumbing: the acceptance-criteria scoreboard.

``tests/test_acceptance.py`` records every check it makes through
:func:`record_acceptance`; at the end of the session one PASS/FAIL line is
printed per criterion, independent of pytest's own reporting.
"""

ACCEPTANCE_LOG: list = []  # entries: (number, title, passed, detail)

ACCEPTANCE_TITLES = {
    1: "conservation identity holds for every equilibrium in the battery",
    2: "constant-coefficient mass-action equilibrium hits (1, 2)",
    3: "constant-coefficient sublinear equilibrium hits the golden pair",
    4: "R0: closed form, monotone in d_I, and matches endemic outcomes",
    5: "lambda0 closed form for constant coefficients",
    6: "sublinear small-d_I sweep converges to the limit profile",
    7: "joint-limit sweep converges; zero-infection set matches the map",
    8: "small-d_I infection vanishes off the high-risk set; masks align",
    9: "monotone bracketing sequences: strict, consistent, oracle-checked",
    10: "a-priori bound audits pass; floor constant reproduced",
    11: "scenario artifacts are byte-identical across runs",
}


def record_acceptance(number: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_LOG.append((number, ACCEPTANCE_TITLES[number], bool(passed), detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(ACCEPTANCE_TITLES):
        entries = [e for e in ACCEPTANCE_LOG if e[0] == number]
        if not entries:
            continue
        failed = [e for e in entries if not e[2]]
        if failed:
            detail = next((e[3] for e in failed if e[3]), "")
            line = f"ACCEPTANCE {number:02d} FAIL: {ACCEPTANCE_TITLES[number]}"
            if detail:
                line += f" [{detail}]"
        else:
            line = f"ACCEPTANCE {number:02d} PASS: {ACCEPTANCE_TITLES[number]}"
        terminalreporter.write_line(line)
