"""Registry of the nine puzzle environments."""

from ..core import ENV_IDS
from .checker import CheckerEnvironment
from .crypto import CryptoEnvironment
from .graphcolor import GraphColorEnvironment
from .hanoi import HanoiEnvironment
from .river import RiverEnvironment
from .rubik import RubikEnvironment
from .sat import SatEnvironment
from .sudoku import SudokuEnvironment
from .waterjug import WaterJugEnvironment

_ENV_CLASSES = {
    "checker": CheckerEnvironment,
    "crypto": CryptoEnvironment,
    "graphcolor": GraphColorEnvironment,
    "hanoi": HanoiEnvironment,
    "river": RiverEnvironment,
    "rubik": RubikEnvironment,
    "sat": SatEnvironment,
    "sudoku": SudokuEnvironment,
    "waterjug": WaterJugEnvironment,
}

assert set(_ENV_CLASSES) == set(ENV_IDS)

_instances = {}


def get_environment(env_id: str, strict_parse: bool = False):
    """Shared environment object for an id (environments hold no run state)."""
    if env_id not in _ENV_CLASSES:
        raise ValueError(f"unknown environment id: {env_id!r}")
    key = (env_id, strict_parse)
    if key not in _instances:
        env = _ENV_CLASSES[env_id]()
        env.strict_parse = strict_parse
        _instances[key] = env
    return _instances[key]


def all_environments(strict_parse: bool = False):
    return [get_environment(env_id, strict_parse) for env_id in ENV_IDS]
