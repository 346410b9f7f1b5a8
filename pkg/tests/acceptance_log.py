"""Shared record of acceptance verdicts, printed in the terminal summary."""

RESULTS = {}


def record(number, title, ok, seconds):
    RESULTS[number] = (title, ok, seconds)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({seconds:.2f}s)")
