import pytest

from fdsec.engine import solve_problem
from fdsec.scenario import SystemConfig, generate_drop

# desk-scale seeds with known status at the default targets (deterministic)
FEASIBLE_SEED = 20
INFEASIBLE_SEED = 21


@pytest.fixture(scope="session")
def desk_cfg():
    return SystemConfig.desk_scale()


@pytest.fixture(scope="session")
def desk_drop(desk_cfg):
    return generate_drop(desk_cfg, FEASIBLE_SEED)


@pytest.fixture(scope="session")
def desk_p1(desk_drop):
    prog, rep, rec = solve_problem("P1", desk_drop)
    assert rec.status == "optimal"
    return prog, rep, rec


@pytest.fixture(scope="session")
def tiny_cfg():
    # smallest instance that still has every constraint family active
    return SystemConfig.desk_scale(K=1, J=1, M=1, N_T=2, N_R=2,
                                   gamma_dl_req_db=6.0, gamma_ul_req_db=3.0)
