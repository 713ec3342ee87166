from __future__ import annotations

import pathlib

import pytest

from lve.parser import parse_program

ROOT = pathlib.Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"
GOLDEN = pathlib.Path(__file__).resolve().parent / "golden"


@pytest.fixture(scope="session")
def samples_dir() -> pathlib.Path:
    return SAMPLES


@pytest.fixture(scope="session")
def golden_dir() -> pathlib.Path:
    return GOLDEN


@pytest.fixture(scope="session")
def sixnode_text() -> str:
    return (SAMPLES / "sixnode.lve").read_text()


@pytest.fixture()
def sixnode(sixnode_text):
    return parse_program(sixnode_text)


@pytest.fixture()
def sixnode_term(sixnode):
    return sixnode.term
