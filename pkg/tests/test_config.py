import math
from pathlib import Path

import numpy as np
import pytest

from maxminlyap.errors import ConfigError
from maxminlyap.sysdsl import parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def test_single_linear_mode_region_all():
    parsed = parse_config(
        """
        [system]
        dim = 2
        mode 1 { A = [[-1, 0], [0, -1]] }
        """
    )
    sys_cfg = parsed.require_system()
    assert sys_cfg.dim == 2
    assert len(sys_cfg.modes) == 1
    assert sys_cfg.modes[0].region_all
    np.testing.assert_allclose(sys_cfg.modes[0].A, -np.eye(2))


def test_example3_reference_config():
    parsed = parse_config((CONFIGS / "example3.cfg").read_text())
    sys_cfg = parsed.require_system()
    assert sys_cfg.dim == 3
    assert len(sys_cfg.modes) == 2
    np.testing.assert_allclose(sys_cfg.modes[0].Q, np.diag([1.0, 1.0, -1.0]))
    basis = parsed.require_basis()
    assert basis.kind == "quadratic"
    assert basis.families == ((1,), (2,))


def test_example1_reference_config_constants():
    parsed = parse_config((CONFIGS / "example1.cfg").read_text())
    q1 = parsed.require_system().modes[0].Q
    assert q1[0, 0] == pytest.approx(-(1 + math.sqrt(2.0)), abs=1e-15)


def test_empty_family_rejected():
    with pytest.raises(ConfigError, match="empty"):
        parse_config(
            """
            [basis]
            P1 = [[1, 0], [0, 1]]
            [structure]
            S1 = {}
            """
        )


def test_error_carries_position():
    try:
        parse_config("[system]\ndim = 2\nmode 1 { A = [[1, 2], [3]] }\n")
    except ConfigError as err:
        assert err.line == 3
    else:
        pytest.fail("expected ConfigError")


def test_nonsymmetric_q_rejected():
    with pytest.raises(ConfigError, match="non-symmetric"):
        parse_config(
            """
            [system]
            dim = 2
            mode 1 { A = [[-1, 0], [0, -1]]; Q = [[1, 2], [0, -1]] }
            """
        )


def test_negative_semidefinite_q_rejected():
    with pytest.raises(ConfigError, match="negative semidefinite"):
        parse_config(
            """
            [system]
            dim = 2
            mode 1 { A = [[-1, 0], [0, -1]]; Q = [[-1, 0], [0, -2]] }
            """
        )


def test_dimension_mismatch_rejected():
    with pytest.raises(ConfigError):
        parse_config(
            """
            [system]
            dim = 2
            mode 1 { f = (x1 + x3, -x2) }
            """
        )


def test_duplicate_region_rejected():
    with pytest.raises(ConfigError, match="more than once"):
        parse_config(
            """
            [system]
            dim = 2
            mode 1 { A = [[-1, 0], [0, -1]]; Q = [[1, 0], [0, -1]] }
            [signal]
            Q1 = [[1, 0], [0, -1]]
            """
        )


def test_basis_not_positive_definite_rejected():
    with pytest.raises(ConfigError, match="positive definite"):
        parse_config(
            """
            [basis]
            P1 = [[1, 0], [0, -1]]
            [structure]
            S1 = {1}
            """
        )


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config("[nonsense]\nfoo = 1\n")


def test_structure_out_of_range_rejected():
    with pytest.raises(ConfigError, match="references base"):
        parse_config(
            """
            [basis]
            P1 = [[1, 0], [0, 1]]
            [structure]
            S1 = {1, 2}
            """
        )


def test_expression_basis_and_signal_section():
    parsed = parse_config(
        """
        [system]
        dim = 1
        mode 1 { f = (-1.0) }
        mode 2 { f = (2.0) }
        [signal]
        H1 = -x1
        H2 = x1
        [basis]
        V1 = x1
        V2 = -x1
        [structure]
        S1 = {1}
        S2 = {2}
        """
    )
    sys_cfg = parsed.require_system()
    assert sys_cfg.modes[0].H is not None
    basis = parsed.require_basis()
    assert basis.kind == "expr"
    spec = basis.to_spec()
    assert spec.K == 2 and spec.J == 2


def test_matrix_entries_are_constant_expressions():
    parsed = parse_config(
        """
        [system]
        dim = 2
        mode 1 { A = [[-1, 0], [0, -1]]; Q = [[1, sqrt(2)], [sqrt(2), 1]] }
        """
    )
    q = parsed.require_system().modes[0].Q
    assert q[0, 1] == pytest.approx(math.sqrt(2.0), abs=0)
