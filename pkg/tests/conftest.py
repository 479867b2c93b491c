import pytest

from guardsim.sim import Simulation
from guardsim.units import to_units


@pytest.fixture
def sim():
    return Simulation(seed=0, name="test")


def fund_accounts(sim, count, balance=10, age_ticks=86400):
    """Create accounts and age them past the fresh-wallet credit threshold."""
    addresses = [sim.ledger.create_account(to_units(balance)) for _ in range(count)]
    if age_ticks:
        sim.ledger.advance_time(age_ticks)
    return addresses


@pytest.fixture
def parties(sim):
    return fund_accounts(sim, 3)
