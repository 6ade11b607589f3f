import pytest

from dqclayout.bench import (BENCHMARK_SUITE, BenchmarkSpec, gen_bitcode, gen_ghz, gen_qaoa,
                             gen_tfim)
from dqclayout.partition import PartitionPlan, lower_to_remote
from dqclayout.sim import ideal_distribution


def remotes(c, *ranges):
    plan = PartitionPlan.from_ranges(ranges, [f"Q{i}" for i in range(len(ranges))])
    return len(lower_to_remote(c, plan)[1])


def test_ghz():
    assert len(gen_ghz(2)) == 4
    assert ideal_distribution(gen_ghz(2)) == pytest.approx({"00": 0.5, "11": 0.5})
    assert len(gen_ghz(6)) == 12
    assert remotes(gen_ghz(6), "q0-q1", "q2-q3", "q4-q5") == 2
    assert remotes(gen_ghz(12), "q0-q3", "q4-q7", "q8-q11") == 2


def test_bitcode():
    c = gen_bitcode(3, 2, [0, 1, 0])
    assert ideal_distribution(c) == {"00100": 1.0}
    assert remotes(c, "q0-q2", "q3-q4") == 2
    assert remotes(c, "q0", "q1-q4") == 2
    empty = gen_bitcode(3, 0, [0, 0, 0])
    assert ideal_distribution(empty) == {"00000": 1.0}
    assert all(i.kind.value == "measure" for i in empty.instructions)


def test_bitcode_syndrome_bits_flag_the_flip():
    # middle data bit set: both ancillas see odd parity in every round
    c = gen_bitcode(3, 2, [0, 1, 0])
    d = ideal_distribution(c, key_clbits=list(range(5, 9)))
    assert d == {"1111": 1.0}


def test_tfim():
    assert remotes(gen_tfim(3), "q0", "q1-q2") == 6
    assert remotes(gen_tfim(3), "q0-q1", "q2") == 6
    assert ideal_distribution(gen_tfim(3, J=0, h=0)) == {"111": 1.0}


def test_qaoa():
    assert remotes(gen_qaoa(4), "q0-q1", "q2-q3") == 8
    assert remotes(gen_qaoa(10), "q0-q3", "q4-q6", "q7-q9") == 66


def test_spec_parsing():
    s = BenchmarkSpec.parse("qaoa:4:gamma=0.3,beta=0.2")
    assert (s.family, s.size, s.params) == ("qaoa", 4, {"gamma": 0.3, "beta": 0.2})
    assert BenchmarkSpec.parse("bitcode:3:initial_bits=010,rounds=1").build().num_clbits == 7
    for bad in ["ghz", "nope:3", "ghz:x", "ghz:1"]:
        with pytest.raises(ValueError):
            BenchmarkSpec.parse(bad)


def test_suite_has_twelve_rows():
    assert len(BENCHMARK_SUITE) == 12
