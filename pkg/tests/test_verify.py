import numpy as np

from uplink_isac import verify
from uplink_isac.verify import check_joint_ml


def test_verify_passes():
    report = verify(0)
    assert report.passed, report.format()
    assert "all checks passed" in report.format()


def _broken_projector(A):
    # drops the Gram inverse: not a projector unless A has orthonormal columns
    return np.eye(A.shape[0]) - A @ A.conj().T


def test_verify_catches_broken_projector():
    checks = check_joint_ml(np.random.default_rng(0), count=10,
                            projector=_broken_projector)
    assert not all(c.passed for c in checks)


def test_cli_verify_exit_code(capsys):
    from uplink_isac.cli import main
    assert main(["verify", "--seed", "1"]) == 0
    assert "all checks passed" in capsys.readouterr().out
