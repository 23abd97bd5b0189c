import pytest

from convground import fixtures, load_dialogues, load_gold


@pytest.fixture(scope="session")
def dialogues():
    return load_dialogues(fixtures.path(fixtures.DIALOGUES))


@pytest.fixture(scope="session")
def dialogues_by_id(dialogues):
    return {d.id: d for d in dialogues}


@pytest.fixture(scope="session")
def gold(dialogues):
    return load_gold(fixtures.path(fixtures.GOLD), dialogues)


@pytest.fixture(scope="session")
def predictions(dialogues):
    return load_gold(fixtures.path(fixtures.PREDICTIONS), dialogues)
