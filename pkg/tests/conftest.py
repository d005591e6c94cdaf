import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger jit compilation once so individual test timings measure work,
    not compiler startup."""
    from iidmatch.online_algs import run_vw, sample_arrivals
    from iidmatch.rounding import dr
    from iidmatch.sparsify import ModifiedVector
    from iidmatch.decomp import decompose
    from iidmatch.instance import Edge, Instance

    rng = np.random.default_rng(0)
    F = dr({("u", "v"): 0.5, ("u", "w"): 0.5}, 2, rng)
    decompose(F, 2)
    inst = Instance((("u", 1.0),), (("v", 1.0), ("w", 1.0)),
                    (Edge("u", "v"), Edge("u", "w")), 2)
    run_vw(inst, sample_arrivals(inst, rng), rng,
           hprime=ModifiedVector({("u", "v"): 1.0}))
