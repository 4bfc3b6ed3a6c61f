"""Shared helpers: corpus loading and the acceptance summary printed at the end of a run."""
from __future__ import annotations

import random
from functools import lru_cache
from pathlib import Path

import pytest

from corocpc.gen import coroutine_program
from corocpc.lang import parse_program, typecheck

ROOT = Path(__file__).resolve().parent.parent
RUN_CORPUS = ROOT / "corpus" / "run"
CHECK_CORPUS = ROOT / "corpus" / "check"
GOLDEN = Path(__file__).resolve().parent / "golden"
N_GENERATED = 200

ACCEPTANCE_LINES: list = []


def load_source(source: str, name: str = "<test>"):
    return typecheck(parse_program(source, name))


def load_file(path: Path):
    return load_source(path.read_text(encoding="utf-8"), str(path))


def run_corpus_paths() -> list:
    return sorted(RUN_CORPUS.glob("*.mc"))


@lru_cache(maxsize=None)
def generated_source(seed: int) -> str:
    return coroutine_program(random.Random(seed))


def generated_programs(n: int = N_GENERATED):
    for seed in range(n):
        yield f"gen{seed}", load_source(generated_source(seed), f"gen{seed}")


def report(criterion: str, passed, detail: str) -> None:
    """Record one acceptance line (``passed=None`` for not applicable); also printed for ``-s`` runs."""
    tag = {True: "PASS", False: "FAIL", None: "N/A"}[passed]
    line = f"[{tag}] {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def src():
    return load_source
