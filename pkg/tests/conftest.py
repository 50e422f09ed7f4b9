import os
import sys

import pytest

# the app and the job store read DATABASE_URL at import time
os.environ.setdefault("DATABASE_URL", "sqlite://")
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from models.core import Database, Relation  # noqa: E402
from models import eb_ast as eb  # noqa: E402
from models.core import ScalarKind  # noqa: E402


INT = ScalarKind.INT
BOOL = ScalarKind.BOOL


@pytest.fixture
def env():
    return {
        "s": eb.TSet(INT),
        "t": eb.TSet(INT),
        "u": eb.TSet(INT),
        "r": eb.TRel(INT, INT),
        "q": eb.TRel(INT, INT),
        "b": eb.TSet(BOOL),
    }


@pytest.fixture
def db():
    return Database({
        "s": Relation.of_set(1, 2, 3),
        "t": Relation.of_set(2, 3, 4),
        "u": Relation.of_set(),
        "r": Relation.of_pairs((1, 10), (2, 20), (3, 30), (3, 31)),
        "q": Relation.of_pairs((10, 1), (30, 3), (4, 40)),
        "b": Relation.of_set(True),
    })
