import numpy as np
import pytest

from hetnet_ee import EfficiencyModel, sample_instance


@pytest.fixture
def model():
    return EfficiencyModel(m=2)


def random_instance(rng, *, k_range=(2, 8), f_range=(1, 4), mean_cross=0.5,
                    snr_range=(-5.0, 25.0)):
    """One random valid instance; F is clipped to respect K >= F+1."""
    k = int(rng.integers(k_range[0], k_range[1] + 1))
    f = int(rng.integers(f_range[0], min(f_range[1], k - 1) + 1))
    return sample_instance(
        k,
        f,
        mean_cross=mean_cross,
        snr_db=float(rng.uniform(*snr_range)),
        seed=int(rng.integers(2**48)),
    )
