import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from protolab.bspl.core import parse_bspl
from protolab.matrix import fixture_text


@pytest.fixture(scope="session")
def purchase():
    return parse_bspl(fixture_text("purchase.bspl"))


@pytest.fixture(scope="session")
def pricing():
    return parse_bspl(fixture_text("pricing.bspl"))


@pytest.fixture(scope="session")
def flexible_purchase():
    return parse_bspl(fixture_text("flexible_purchase.bspl"))


@pytest.fixture(scope="session")
def catalog():
    return parse_bspl(fixture_text("catalog.bspl"))


@pytest.fixture(scope="session")
def want_willpay():
    return parse_bspl(fixture_text("want_willpay.bspl"))


@pytest.fixture(scope="session")
def indirect_payment():
    return parse_bspl(fixture_text("indirect_payment.bspl"))
