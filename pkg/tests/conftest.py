import numpy as np
import pytest

from vdtoda import ModelParams, State, random_state


@pytest.fixture
def zero3() -> State:
    return State(np.zeros(3), np.zeros(3))


def draw_states(n: int, count: int, seed: int, box: float = 2.0) -> list[State]:
    rng = np.random.default_rng(seed)
    return [random_state(n, rng, box=box) for _ in range(count)]


def moderate_params(n: int, kappa: float = 1.0) -> ModelParams:
    # beta = 0.5 with |xi|, |eta| <= 1 keeps every flow-based check well
    # inside the double-precision horizon of the factorization solver
    return ModelParams(n, 0.5, kappa)
