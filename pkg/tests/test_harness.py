import numpy as np
import pytest

from edgefdr import (
    ExperimentConfig,
    ExperimentDesign,
    MetricsRecord,
    SbmParams,
    aggregate,
    fdp,
    run_experiment,
    run_replication,
    tdp,
)
from edgefdr.harness import _stage_seeds


def tiny_config(**overrides):
    params = SbmParams(pi=np.array([0.5, 0.5]),
                       gamma=np.array([[0.6, 0.1], [0.1, 0.6]]))
    base = dict(
        methods=("conformal", "nt", "cvt"),
        alphas=(0.1, 0.3),
        n_replications=3,
        master_seed=99,
        design=ExperimentDesign(pi_mis=0.2, ratio_h0_h1=1.0, cal_size=50),
        scorer="cn",
        sbm=params,
        n_nodes=30,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestMetrics:
    def test_empty_selection(self):
        assert fdp([], [(0, 1)]) == 0.0
        assert tdp([], [(0, 1)]) == 0.0

    def test_perfect_selection(self):
        h1 = [(0, 1), (2, 3)]
        assert fdp(h1, h0=[(4, 5)]) == 0.0
        assert tdp(h1, h1) == 1.0

    def test_partial_counts(self):
        selected = [(0, 1), (0, 2), (0, 3)]
        h0 = [(0, 3), (9, 9)]
        h1 = [(0, 1), (0, 2), (5, 6), (7, 8)]
        assert fdp(selected, h0) == pytest.approx(1 / 3)
        assert tdp(selected, h1) == pytest.approx(1 / 2)

    def test_complementarity(self):
        # fdp + precision = 1 for a nonempty selection when every selected
        # pair is either hidden-true or hidden-false
        selected = [(0, 1), (0, 2), (0, 3), (0, 4)]
        h0 = [(0, 3), (0, 4)]
        h1 = [(0, 1), (0, 2)]
        precision = tdp(selected, h1) * len(h1) / len(selected)
        assert fdp(selected, h0) + precision == pytest.approx(1.0)

    def test_record_validation(self):
        with pytest.raises(ValueError):
            MetricsRecord(method="nt", alpha=0.1, replication=0, fdp=1.5,
                          tdp=0.0, n_selected=0, seed=0)


class TestAggregate:
    def make_records(self, values, method="nt", alpha=0.1):
        return [MetricsRecord(method=method, alpha=alpha, replication=i,
                              fdp=v, tdp=1 - v, n_selected=i, seed=i)
                for i, v in enumerate(values)]

    def test_single_replication_zero_std(self):
        rows = aggregate(self.make_records([0.25]))
        assert rows[0].fdr == 0.25
        assert rows[0].fdr_std == 0.0
        assert rows[0].n_replications == 1

    def test_mean_of_extremes(self):
        rows = aggregate(self.make_records([0.0, 1.0]))
        assert rows[0].fdr == pytest.approx(0.5)
        assert rows[0].fdr_std == pytest.approx(np.std([0, 1], ddof=1))

    def test_permutation_invariant(self):
        records = self.make_records([0.1, 0.4, 0.7]) + self.make_records(
            [0.2, 0.3], method="cvt", alpha=0.2)
        rng = np.random.default_rng(0)
        shuffled = list(records)
        rng.shuffle(shuffled)
        assert aggregate(records) == aggregate(shuffled)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            aggregate([])


class TestRunReplication:
    def test_record_cardinality(self):
        config = tiny_config(methods=("conformal",), alphas=(0.1, 0.2,
                                                             0.3, 0.4))
        records = run_replication(config, 0)
        assert len(records) == 4
        assert all(r.method == "conformal" for r in records)

    def test_all_methods_cardinality(self):
        records = run_replication(tiny_config(), 1)
        assert len(records) == 3 * 2

    def test_deterministic(self):
        config = tiny_config()
        assert run_replication(config, 2) == run_replication(config, 2)

    def test_replications_differ(self):
        config = tiny_config()
        r0 = run_replication(config, 0)
        r1 = run_replication(config, 1)
        assert r0 != r1

    def test_pi_mis_zero_fails_before_scoring(self):
        config = tiny_config(design=ExperimentDesign(
            pi_mis=0.0, ratio_h0_h1=1.0, cal_size=50))
        with pytest.raises(ValueError, match="test set is empty"):
            run_replication(config, 0)

    def test_seed_column_stable(self):
        config = tiny_config()
        records = run_replication(config, 5)
        seeds = {r.seed for r in records}
        assert len(seeds) == 1
        assert seeds.pop() == _stage_seeds(config.master_seed, 5)[0]


class TestStageSeeds:
    def test_no_collisions_over_many_replications(self):
        seeds = [_stage_seeds(7, rep)[0] for rep in range(10_000)]
        assert len(set(seeds)) == len(seeds)

    def test_depends_on_master_seed(self):
        assert _stage_seeds(1, 0) != _stage_seeds(2, 0)


class TestRunExperiment:
    def test_sorted_and_complete(self):
        config = tiny_config()
        records = run_experiment(config)
        assert len(records) == 3 * 2 * 3
        keys = [(r.method, r.alpha, r.replication) for r in records]
        assert keys == sorted(keys)

    def test_parallel_matches_sequential(self):
        sequential = run_experiment(tiny_config())
        parallel = run_experiment(tiny_config(n_jobs=2))
        assert sequential == parallel

    def test_config_validation(self):
        with pytest.raises(ValueError, match="replication count"):
            tiny_config(n_replications=0)
        with pytest.raises(ValueError, match="alpha"):
            tiny_config(alphas=(0.0, 0.5))
        with pytest.raises(ValueError, match="methods"):
            tiny_config(methods=("bogus",))
        with pytest.raises(ValueError, match="exactly one"):
            tiny_config(sbm=None)
        with pytest.raises(ValueError, match="pi0_method"):
            tiny_config(pi0_method="oracle")

    def test_design_pi0_method(self):
        config = tiny_config(methods=("conformal",), pi0_method="design")
        records = run_experiment(config)
        assert len(records) == 2 * 3

    def test_directed_end_to_end(self):
        params = SbmParams(pi=np.array([0.5, 0.5]),
                           gamma=np.array([[0.5, 0.1], [0.3, 0.5]]))
        config = tiny_config(sbm=params, directed=True, self_pairs=False,
                             n_nodes=25)
        records = run_experiment(config)
        assert len(records) == 3 * 2 * 3
        assert run_experiment(config) == records


class TestRealDataMode:
    def test_fixed_graph_with_resampled_splits(self):
        # the full adjacency stays fixed; each replication hides a fresh
        # random subset of its edges and non-edges
        from edgefdr import generate_sbm
        params = SbmParams(pi=np.array([0.5, 0.5]),
                           gamma=np.array([[0.6, 0.1], [0.1, 0.6]]))
        a_star, _ = generate_sbm(params, 30, self_loops=False, seed=4)
        config = tiny_config(sbm=None, n_nodes=None, a_star=a_star,
                             self_pairs=False)
        records = run_experiment(config)
        assert len(records) == 3 * 2 * 3
        assert run_experiment(config) == records
        # splits really differ across replications
        by_rep = {r.replication for r in records}
        assert by_rep == {0, 1, 2}


class TestFdrControlAcrossRegimes:
    """The conformal guarantee should hold in designs beyond the main
    benchmark; these are cheaper, coarser checks."""

    def run_conformal(self, config, alpha):
        records = [r for r in run_experiment(config)
                   if r.method == "conformal" and r.alpha == alpha]
        fdps = np.array([r.fdp for r in records])
        se = fdps.std(ddof=1) / np.sqrt(len(fdps))
        return fdps.mean(), se

    def test_balanced_hidden_split(self):
        config = tiny_config(methods=("conformal",), alphas=(0.2,),
                             n_replications=50, master_seed=314,
                             design=ExperimentDesign(pi_mis=0.2,
                                                     ratio_h0_h1=1.0,
                                                     cal_size=200),
                             n_nodes=40, pi0_method="design")
        fdr, se = self.run_conformal(config, 0.2)
        assert fdr <= 0.2 + 3 * se

    def test_directed_graph_control(self):
        params = SbmParams(pi=np.array([0.5, 0.5]),
                           gamma=np.array([[0.5, 0.05], [0.05, 0.5]]))
        config = tiny_config(methods=("conformal",), alphas=(0.2,),
                             n_replications=50, master_seed=315,
                             sbm=params, directed=True, self_pairs=False,
                             n_nodes=35,
                             design=ExperimentDesign(pi_mis=0.15,
                                                     ratio_h0_h1=0.5,
                                                     cal_size=300),
                             pi0_method="design")
        fdr, se = self.run_conformal(config, 0.2)
        assert fdr <= 0.2 + 3 * se
