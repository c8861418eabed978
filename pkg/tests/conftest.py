import copy
import json

import pytest

from cogscreen import load_bundled_bank, load_bundled_config
from cogscreen.item_bank import bundled_bank_path
from cogscreen.session import Demographics, create_session


@pytest.fixture(scope="session")
def bank():
    return load_bundled_bank()


@pytest.fixture(scope="session")
def config():
    return load_bundled_config()


@pytest.fixture(scope="session")
def bank_doc():
    return json.loads(bundled_bank_path().read_text(encoding="utf-8"))


@pytest.fixture
def mutable_bank_doc(bank_doc):
    return copy.deepcopy(bank_doc)


@pytest.fixture
def make_session(bank, config):
    def factory(seed=42, age=70, education="secondary", created_ts=1615800000.0, cfg=None):
        return create_session(
            cfg or config,
            bank,
            Demographics(age=age, education=education),
            seed=seed,
            created_ts=created_ts,
        )

    return factory
