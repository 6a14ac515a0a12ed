"""Shared record of acceptance outcomes, printed at the end of the pytest run."""

RESULTS: list[tuple[int, bool, str]] = []


def record(number: int, ok: bool, detail: str) -> bool:
    RESULTS.append((number, bool(ok), detail))
    return bool(ok)
