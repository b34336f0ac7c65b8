import sympy
import pytest

from elab.ratpoly import Poly

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def to_sympy(p: Poly):
    """Independent view of a polynomial for oracle checks."""
    syms = {n: sympy.Symbol(n) for n in p.ring.names}
    return sympy.expand(sympy.sympify(str(p).replace("^", "**"), locals=syms))


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request, capsys):
    """``acceptance(n, ok, detail)`` records and prints one criterion line."""
    log = request.config.stash[_ACCEPTANCE_KEY]

    def record(n, title, ok, detail=""):
        line = f"ACCEPTANCE {n:>2} {'PASS' if ok else 'FAIL'} {title}" + (f": {detail}" if detail else "")
        log.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
