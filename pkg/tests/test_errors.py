import pickle

import pytest

from src.cubic_lab.errors import (
    BracketError,
    CoexistenceError,
    ConfigError,
    CriticalPointError,
    DomainError,
    EmptyConditionError,
)


def test_coexistence_error_survives_pickling():
    error = CoexistenceError(0.0, 2.0, (-0.957504, 0.957504))
    copy = pickle.loads(pickle.dumps(error))
    assert isinstance(copy, CoexistenceError)
    assert copy.minimizers == error.minimizers
    assert (copy.K, copy.J) == (0.0, 2.0)
    assert str(copy) == str(error)
    assert copy.exit_code == 3


@pytest.mark.parametrize(
    "error",
    [CriticalPointError(), ConfigError("bad grid"), DomainError("n >= 1"), EmptyConditionError("empty"), BracketError("no sign change")],
)
def test_errors_survive_pickling(error):
    copy = pickle.loads(pickle.dumps(error))
    assert type(copy) is type(error)
    assert str(copy) == str(error)
    assert copy.exit_code == error.exit_code
