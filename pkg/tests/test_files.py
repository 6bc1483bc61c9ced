import numpy as np
import pytest

from edgefdr import MetricsRecord
from edgefdr.config import load_experiment_config, parse_config
from edgefdr.files import (
    CSV_HEADER,
    load_observed_graph,
    read_edge_list,
    read_pairs,
    read_truth,
    write_edge_list,
    write_mask,
    write_pairs,
    write_records_csv,
)
from conftest import pair_set


class TestEdgeListFormat:
    def test_read_with_comments_and_status(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("# header comment\n0 1\n2 3 1\n\n4 5 0\n")
        edges, falses = read_edge_list(path)
        assert pair_set(edges) == {(0, 1), (2, 3)}
        assert pair_set(falses) == {(4, 5)}

    def test_bad_token_reports_line(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\nx 2\n")
        with pytest.raises(ValueError, match=r"edges.txt:2"):
            read_edge_list(path)

    def test_bad_field_count_reports_line(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1 2 3\n")
        with pytest.raises(ValueError, match=r"edges.txt:1"):
            read_edge_list(path)

    def test_negative_id_rejected(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 -1\n")
        with pytest.raises(ValueError, match="nonnegative"):
            read_edge_list(path)

    def test_one_based(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("1 2\n3 4\n")
        edges, _ = read_edge_list(path, index_base=1)
        assert pair_set(edges) == {(0, 1), (2, 3)}
        path.write_text("0 1\n")
        with pytest.raises(ValueError, match="1-based"):
            read_edge_list(path, index_base=1)
        with pytest.raises(ValueError, match="index_base"):
            read_edge_list(path, index_base=2)

    def test_bad_status_reports_line(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1 2\n")
        with pytest.raises(ValueError, match="status"):
            read_edge_list(path)

    def test_empty_file_without_count_rejected(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("# nothing\n")
        with pytest.raises(ValueError, match="node count"):
            load_observed_graph(path)


class TestGraphRoundTrip:
    def test_write_then_read_reproduces_graph(self, toy_graph, tmp_path):
        edges_path = tmp_path / "edges.txt"
        mask_path = tmp_path / "mask.txt"
        write_edge_list(toy_graph, edges_path)
        write_mask(toy_graph, mask_path)
        rebuilt = load_observed_graph(edges_path, mask_path, n=5)
        assert rebuilt == toy_graph

    def test_node_count_inferred(self, toy_graph, tmp_path):
        edges_path = tmp_path / "edges.txt"
        mask_path = tmp_path / "mask.txt"
        write_edge_list(toy_graph, edges_path)
        write_mask(toy_graph, mask_path)
        rebuilt = load_observed_graph(edges_path, mask_path)
        assert rebuilt.n == 5

    def test_declared_count_too_small(self, toy_graph, tmp_path):
        edges_path = tmp_path / "edges.txt"
        write_edge_list(toy_graph, edges_path)
        with pytest.raises(ValueError, match="node count"):
            load_observed_graph(edges_path, n=3)

    def test_duplicate_reversed_edges_merged_with_warning(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n1 0\n")
        with pytest.warns(UserWarning, match="duplicate"):
            graph = load_observed_graph(path)
        assert pair_set(graph.edges) == {(0, 1)}

    def test_explicit_false_conflicts(self, tmp_path):
        edges_path = tmp_path / "edges.txt"
        edges_path.write_text("0 1\n0 1 0\n")
        with pytest.raises(ValueError, match="both"):
            load_observed_graph(edges_path)
        edges_path.write_text("0 1\n0 2 0\n")
        mask_path = tmp_path / "mask.txt"
        mask_path.write_text("0 2\n")
        with pytest.raises(ValueError, match="unsampled"):
            load_observed_graph(edges_path, mask_path)

    def test_no_mask_means_fully_observed(self, tmp_path):
        path = tmp_path / "edges.txt"
        path.write_text("0 1\n1 2\n")
        graph = load_observed_graph(path)
        assert len(graph.missing) == 0


class TestPairsAndTruth:
    def test_selected_roundtrip_sorted(self, tmp_path):
        path = tmp_path / "selected.txt"
        write_pairs(np.array([[3, 4], [0, 2], [0, 1]]), path)
        assert path.read_text() == "0 1\n0 2\n3 4\n"
        assert pair_set(read_pairs(path)) == {(0, 1), (0, 2), (3, 4)}

    def test_truth_file(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("1 3 1\n2 3 0\n")
        h0, h1 = read_truth(path)
        assert pair_set(h0) == {(2, 3)}
        assert pair_set(h1) == {(1, 3)}

    def test_truth_requires_status(self, tmp_path):
        path = tmp_path / "truth.txt"
        path.write_text("1 3\n")
        with pytest.raises(ValueError, match="expected 3"):
            read_truth(path)


class TestCsv:
    def records(self):
        return [MetricsRecord(method="nt", alpha=0.1, replication=1,
                              fdp=0.25, tdp=0.5, n_selected=4, seed=7),
                MetricsRecord(method="conformal", alpha=0.1, replication=0,
                              fdp=0.0, tdp=1.0, n_selected=2, seed=3)]

    def test_schema_and_order(self, tmp_path):
        path = tmp_path / "out.csv"
        write_records_csv(self.records(), path)
        lines = path.read_text().splitlines()
        assert lines[0] == CSV_HEADER
        assert lines[1].startswith("conformal,")  # sorted by method
        assert lines[2] == "nt,0.1,1,0.25,0.5,4,7"
        assert path.read_text().endswith("\n")

    def test_stable_bytes(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_records_csv(self.records(), a)
        write_records_csv(list(reversed(self.records())), b)
        assert a.read_bytes() == b.read_bytes()


class TestConfigParsing:
    def write_config(self, tmp_path, extra="", drop=()):
        lines = {
            "experiment.methods": "conformal,nt",
            "experiment.alphas": "0.1,0.2",
            "experiment.replications": "2",
            "experiment.seed": "5",
            "experiment.output": "out.csv",
            "graph.n": "20",
            "sbm.pi": "0.5,0.5",
            "sbm.gamma": "0.6,0.1; 0.1,0.6",
            "design.pi_mis": "0.2",
            "design.ratio_h0_h1": "1.0",
            "design.cal_size": "30",
        }
        for key in drop:
            lines.pop(key)
        text = "\n".join(f"{k} = {v}" for k, v in lines.items())
        path = tmp_path / "exp.cfg"
        path.write_text(text + "\n" + extra)
        return path

    def test_full_parse(self, tmp_path):
        config = load_experiment_config(self.write_config(tmp_path))
        assert config.methods == ("conformal", "nt")
        assert config.alphas == (0.1, 0.2)
        assert config.sbm.gamma.shape == (2, 2)
        assert config.output == "out.csv"

    def test_unknown_key_rejected(self, tmp_path):
        path = self.write_config(tmp_path, extra="sbm.typo = 3\n")
        with pytest.raises(ValueError, match="unknown key"):
            parse_config(path)

    def test_duplicate_key_rejected(self, tmp_path):
        path = self.write_config(tmp_path, extra="graph.n = 10\n")
        with pytest.raises(ValueError, match="duplicate"):
            parse_config(path)

    def test_missing_required(self, tmp_path):
        path = self.write_config(tmp_path, drop=("experiment.seed",))
        with pytest.raises(ValueError, match="experiment.seed"):
            load_experiment_config(path)

    def test_comments_and_blanks_ignored(self, tmp_path):
        path = self.write_config(tmp_path,
                                 extra="# trailing comment\n\n")
        parse_config(path)

    def test_real_data_mode(self, tmp_path):
        edges = tmp_path / "graph.txt"
        edges.write_text("\n".join(
            f"{i} {j}" for i in range(12) for j in range(i + 1, 12)
            if (i + j) % 3) + "\n")
        path = tmp_path / "exp.cfg"
        path.write_text("\n".join([
            "experiment.methods = conformal",
            "experiment.alphas = 0.2",
            "experiment.replications = 1",
            "experiment.seed = 3",
            "experiment.output = out.csv",
            f"data.edges = {edges}",
            "design.pi_mis = 0.2",
            "design.ratio_h0_h1 = 1.0",
            "design.cal_size = 10",
        ]) + "\n")
        config = load_experiment_config(path)
        assert config.sbm is None
        assert config.a_star is not None
        assert config.a_star.shape == (12, 12)
        assert config.self_pairs is False

    def test_sbm_and_data_both_rejected(self, tmp_path):
        path = self.write_config(tmp_path, extra="data.edges = x.txt\n")
        with pytest.raises(ValueError, match="exactly one"):
            load_experiment_config(path)

    def test_scorer_hyperparams_gated(self, tmp_path):
        path = self.write_config(tmp_path,
                                 extra="scorer.learning_rate = 0.5\n")
        with pytest.raises(ValueError, match="logistic"):
            load_experiment_config(path)

    def test_malformed_line_reports_position(self, tmp_path):
        path = self.write_config(tmp_path, extra="no equals sign here\n")
        with pytest.raises(ValueError, match="key = value"):
            parse_config(path)

    def test_bad_value_reports_key(self, tmp_path):
        path = self.write_config(tmp_path, drop=("graph.n",))
        path.write_text(path.read_text() + "graph.n = twenty\n")
        with pytest.raises(ValueError, match="graph.n"):
            parse_config(path)

    def test_unknown_scorer_rejected(self, tmp_path):
        path = self.write_config(tmp_path, extra="scorer.kind = psychic\n")
        with pytest.raises(ValueError, match="unknown scorer"):
            load_experiment_config(path)

    def test_partial_sbm_keys_rejected(self, tmp_path):
        path = self.write_config(tmp_path, drop=("sbm.pi",))
        with pytest.raises(ValueError, match="sbm.pi"):
            load_experiment_config(path)

    def test_sbm_without_node_count_rejected(self, tmp_path):
        path = self.write_config(tmp_path, drop=("graph.n",))
        with pytest.raises(ValueError, match="graph.n"):
            load_experiment_config(path)
