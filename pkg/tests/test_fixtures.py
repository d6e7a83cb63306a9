import hashlib

import numpy as np
import pytest

from isoflow.fixtures import FIXTURE_NAMES, default_t_final, fixture, tridiag
from isoflow.symspace import write_matrix

# sha256 of the little-endian float64 bytes, row-major
GOLDEN = {
    "example1": "14240c0b71cd6bd5e4529b749c7bd59abcb2a6b7c01d154dd9ad62d810acf1b4",
    "example2": "0e64164ec6d6bbebc2a2a1e50384f600c743e6a5978dcb12b5955d05cfa243d2",
    "t5": "a9caeafe11d8146ef31e6ba82abe666ff179aee1bbe541657b73d52a62a20668",
    "t10": "d1d57aea725a84ec2cfadffa084c6552b116240369c57c6562a32853817b4cc3",
    "ts5": "6fcf135c9665b2abd5fabc38dcea69ff8b4d45a087c97013f1599731e65dbfba",
    "ts10": "73e6433ae78755ed683dbad325bfb76bf3871e81411adbbd4b586272ff532ca3",
    "shader": "67913d50e7e5c9449c0ac59c094e5fbcb00303ea983d5f10ee99423a1eb68ffd",
    "circulant": "5f4b58ef76ee9b971deb118ee4a3e4bd90d99243991b21731daedd596b69ae00",
}


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_golden_checksum(name):
    X = fixture(name).X0
    digest = hashlib.sha256(np.ascontiguousarray(X, dtype="<f8").tobytes()).hexdigest()
    assert digest == GOLDEN[name]
    np.testing.assert_array_equal(X, X.T)


def test_example1_entries():
    X = fixture("example1").X0
    assert X[0, 0] == 0.87 and X[0, 1] == 1.23 and X[5, 5] == 1.8
    assert np.count_nonzero(np.triu(X, 2)) == 0  # tridiagonal


def test_example2_entries():
    X = fixture("example2").X0
    assert X.shape == (10, 10)
    assert X[0, 6] == 1.92 and X[0, 5] == 0.0 and X[9, 9] == 1.2


def test_scaled_fixtures():
    np.testing.assert_array_equal(fixture("ts5").X0, 36 * tridiag(5))
    np.testing.assert_array_equal(fixture("ts10").X0, 121 * tridiag(10))
    np.testing.assert_array_equal(fixture("t5").X0, tridiag(5))


def test_t10_spectrum_distinct_negative():
    w = np.linalg.eigvalsh(fixture("t10").X0)
    assert np.all(w < 0) and np.min(np.diff(w)) > 1e-3
    # closed form: -2 + 2 cos(k pi / (n + 1))
    k = np.arange(1, 11)
    np.testing.assert_allclose(np.sort(w), np.sort(-2 + 2 * np.cos(k * np.pi / 11)), atol=1e-13)


def test_file_fixture(tmp_path):
    X = fixture("example1").X0
    write_matrix(tmp_path / "m.mat", X)
    fx = fixture(f"file:{tmp_path / 'm.mat'}")
    np.testing.assert_array_equal(fx.X0, X)


def test_unknown_fixture():
    with pytest.raises(ValueError):
        fixture("t7")
    with pytest.raises(OSError):
        fixture("file:/nonexistent/path.mat")


def test_default_horizons():
    assert default_t_final("example1") == 60.0 and default_t_final("example2") == 60.0
    assert default_t_final("t5") == 200.0 and default_t_final("t10") == 200.0
    assert default_t_final("ts5") == 2.0 and default_t_final("ts10") == 2.0
