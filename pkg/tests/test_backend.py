import os
import subprocess
import sys

import numpy as np
import pytest

from qmiddle import _backend
from qmiddle import _kernels_py as pure
from qmiddle.errors import KernelPoleError

compiled = pytest.importorskip("qmiddle._kernels", reason="compiled extension not built")


def test_compiled_backend_is_default():
    assert _backend.BACKEND == "compiled"


def test_pure_python_switch():
    env = dict(os.environ, QMIDDLE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import qmiddle; print(qmiddle.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_backends_agree():
    rng = np.random.default_rng(1)
    q = 0.55 * np.exp(0.4j)
    s = 0.8 * q ** np.arange(-60, 61).astype(float)
    a = pure.p_lambda_array(1.1 * np.sqrt(q), s, 0.5 + 0.2j, q, 90)
    b = compiled.p_lambda_array(1.1 * np.sqrt(q), s, 0.5 + 0.2j, q, 90)
    assert np.max(np.abs(a - b) / np.abs(a)) < 1e-13
    assert abs(pure.qpoch(0.4j, q, 50) - compiled.qpoch(0.4j, q, 50)) < 1e-14
    mats = rng.normal(size=(30, 3, 3)) + 1j * rng.normal(size=(30, 3, 3))
    y0 = rng.normal(size=3) + 0j
    assert np.allclose(pure.chain(mats, y0), compiled.chain(mats, y0), rtol=1e-13, atol=0)


@pytest.mark.parametrize("kernels", [pure, compiled], ids=["python", "compiled"])
def test_pole_detection_in_both(kernels):
    with pytest.raises(KernelPoleError):
        kernels.p_lambda_array(1.0, np.array([0.3, 2.0]), 0.2, 0.5, 20)
