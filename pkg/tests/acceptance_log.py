"""Shared buffer of acceptance-criterion result lines, printed at session end."""

LINES: list[str] = []


def record(number: int, title: str, ok: bool, detail: str) -> None:
    LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})")
