import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make oracles importable

import navsim

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def one_room_house():
    return navsim.load_house(FIXTURES / "one_room.house.json")


@pytest.fixture(scope="session")
def furnished_house():
    return navsim.generate_house(7, 5, furnished=True)


@pytest.fixture(scope="session")
def empty_house():
    return navsim.generate_house(7, 5, furnished=False)


@pytest.fixture(scope="session")
def furnished_grid(furnished_house):
    return navsim.build_grid(furnished_house, 0.1, 0.1)
