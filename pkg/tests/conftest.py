def pytest_terminal_summary(terminalreporter):
    """Echo one verdict line per acceptance criterion after the run."""
    try:
        from tests import test_acceptance
    except ImportError:
        import test_acceptance  # rootdir layout without a package
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
