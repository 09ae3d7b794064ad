import pytest

from spdc_lens.beam_optics import nm_to_mm

LAMBDA_SIGNAL = nm_to_mm(702.2)
LAMBDA_PUMP = nm_to_mm(351.1)


@pytest.fixture
def lam():
    return LAMBDA_SIGNAL
