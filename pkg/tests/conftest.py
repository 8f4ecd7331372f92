from hypothesis import settings

# some examples build sizeable polynomials; wall-clock deadlines only add flakiness
settings.register_profile("lab", deadline=None)
settings.load_profile("lab")

ACCEPTANCE = {}


def record(number: int, title: str, passed: bool, detail: str = ""):
    ACCEPTANCE[number] = (title, passed, detail)
    line = f"criterion {number} ({title}): {'PASS' if passed else 'FAIL'}"
    print(line + (f" - {detail}" if detail else ""))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, passed, detail = ACCEPTANCE[number]
        line = f"criterion {number} ({title}): {'PASS' if passed else 'FAIL'}"
        terminalreporter.write_line(line + (f" - {detail}" if detail else ""))
