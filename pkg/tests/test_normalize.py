from itertools import product

import pytest

from aop.core import AND, OR, ValidationError
from aop.normalize import (
    CELL_TYPES,
    Cell,
    DelayModel,
    MappedSignal,
    MappedTree,
    Netlist,
    PathInput,
    Stage,
    chain_compress,
    decompose_to_and_inv,
    demorgan_normalize,
    extract_path,
    modified_arrivals,
    normalize,
    signal_arrivals,
    validate_netlist,
)

from conftest import (
    CELL_FN,
    eval_decomposed,
    eval_netlist,
    random_netlist,
    roundtrip_ok,
)

MODEL = DelayModel(10.0, 0.5)


def single_cell_netlist(ctype, n_ins):
    names = ["x"] + [f"s{i}" for i in range(1, n_ins)]
    inputs = tuple(PathInput(nm, 10.0 * i, float(i), 0.0) for i, nm in enumerate(names))
    return Netlist(inputs, (Cell("c0", ctype, tuple(names), 1.0, 1.0),), "c0")


class TestValidate:
    def test_duplicate_id(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0), PathInput("x", 0, 0, 0)),
            (Cell("c0", "INV", ("x",), 0, 0),),
            "c0",
        )
        with pytest.raises(ValidationError):
            validate_netlist(n)

    def test_unknown_driver(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0),),
            (Cell("c0", "AND2", ("x", "ghost"), 0, 0),),
            "c0",
        )
        with pytest.raises(ValidationError):
            validate_netlist(n)

    def test_bad_pin_count(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0),),
            (Cell("c0", "AND2", ("x",), 0, 0),),
            "c0",
        )
        with pytest.raises(ValidationError):
            validate_netlist(n)

    def test_cycle(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0),),
            (
                Cell("c0", "AND2", ("x", "c1"), 0, 0),
                Cell("c1", "INV", ("c0",), 0, 0),
            ),
            "c1",
        )
        with pytest.raises(ValidationError):
            validate_netlist(n)

    def test_output_must_be_cell(self):
        n = Netlist((PathInput("x", 0, 0, 0),), (Cell("c0", "INV", ("x",), 0, 0),), "x")
        with pytest.raises(ValidationError):
            validate_netlist(n)


class TestDecompose:
    @pytest.mark.parametrize("ctype,n_ins", [(t, n) for t, n in CELL_TYPES.items()])
    def test_function_preserved(self, ctype, n_ins):
        n = single_cell_netlist(ctype, n_ins)
        dec = decompose_to_and_inv(n)
        names = [i.id for i in n.inputs]
        for bits in product((0, 1), repeat=n_ins):
            assign = dict(zip(names, bits))
            want = eval_netlist(n, assign)["c0"]
            got_vals = eval_decomposed(dec, assign)
            assert got_vals[dec.alias["c0"]] == want, (ctype, bits)

    def test_only_and_inv_nodes(self):
        n = single_cell_netlist("OAI21", 3)
        dec = decompose_to_and_inv(n)
        assert set(nd.kind for nd in dec.nodes.values()) <= {"and", "inv"}

    def test_buf_becomes_wire(self):
        n = single_cell_netlist("BUF", 1)
        dec = decompose_to_and_inv(n)
        assert dec.nodes == {}
        assert dec.output == "x"

    def test_nor_template(self):
        n = single_cell_netlist("NOR2", 2)
        dec = decompose_to_and_inv(n)
        kinds = sorted(nd.kind for nd in dec.nodes.values())
        assert kinds == ["and", "inv", "inv"]


class TestExtractPath:
    def test_single_gate(self):
        n = single_cell_netlist("AND2", 2)
        dec = decompose_to_and_inv(n)
        path, multi = extract_path(dec, "x")
        assert len(path) == 1 and not multi

    def test_three_stage_chain(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0), PathInput("s1", 0, 0, 0), PathInput("s2", 0, 0, 0)),
            (
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "INV", ("c0",), 0, 0),
                Cell("c2", "OR2", ("c1", "s2"), 0, 0),
            ),
            "c2",
        )
        dec = decompose_to_and_inv(n)
        path, multi = extract_path(dec, "x")
        assert not multi
        assert path[-1] == dec.output

    def test_diamond_flagged(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0), PathInput("s1", 0, 0, 0)),
            (
                Cell("c0", "INV", ("x",), 0, 0),
                Cell("c1", "INV", ("x",), 0, 0),
                Cell("c2", "AND2", ("c0", "c1"), 0, 0),
            ),
            "c2",
        )
        dec = decompose_to_and_inv(n)
        path, multi = extract_path(dec, "x")
        assert multi
        assert path[-1] == dec.output

    def test_unreachable_input(self):
        n = Netlist(
            (PathInput("x", 0, 0, 0), PathInput("s1", 0, 0, 0)),
            (Cell("c0", "INV", ("s1",), 0, 0),),
            "c0",
        )
        dec = decompose_to_and_inv(n)
        with pytest.raises(ValidationError):
            extract_path(dec, "x")

    def test_unknown_input(self):
        dec = decompose_to_and_inv(single_cell_netlist("AND2", 2))
        with pytest.raises(ValidationError):
            extract_path(dec, "nope")


class TestDeMorgan:
    def build(self, cells, inputs=("x", "s1", "s2")):
        ins = tuple(
            PathInput(nm, 0.0, float(i), 0.0) for i, nm in enumerate(inputs)
        )
        return Netlist(ins, tuple(cells), cells[-1].id)

    def test_and_inv_and_spine(self):
        # and - inv - and turns into [and, or] with the second side inverted
        n = self.build(
            [
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "INV", ("c0",), 0, 0),
                Cell("c2", "AND2", ("c1", "s2"), 0, 0),
            ]
        )
        dec = decompose_to_and_inv(n)
        path, _ = extract_path(dec, "x")
        stages, polarity = demorgan_normalize(dec, path, "x")
        assert [st.kind for st in stages] == [AND, OR]
        assert [st.inverted for st in stages] == [False, True]
        assert stages[0].side == "s1" and stages[1].side == "s2"
        assert polarity is True  # the inversion propagates to the output

    def test_inv_free_path_unchanged(self):
        n = self.build(
            [
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "OR2", ("c0", "s2"), 0, 0),
            ]
        )
        dec = decompose_to_and_inv(n)
        path, _ = extract_path(dec, "x")
        stages, polarity = demorgan_normalize(dec, path, "x")
        assert [st.kind for st in stages] == [AND, OR]
        assert not any(st.inverted for st in stages)
        assert polarity is False

    def test_trailing_inverter_sets_polarity(self):
        n = self.build(
            [
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "INV", ("c0",), 0, 0),
            ],
            inputs=("x", "s1"),
        )
        dec = decompose_to_and_inv(n)
        path, _ = extract_path(dec, "x")
        stages, polarity = demorgan_normalize(dec, path, "x")
        assert polarity is True
        assert [st.kind for st in stages] == [AND]

    def test_semantics_8_assignments(self):
        # truth-table check of the stage/polarity contract
        n = self.build(
            [
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "INV", ("c0",), 0, 0),
                Cell("c2", "AND2", ("c1", "s2"), 0, 0),
            ]
        )
        dec = decompose_to_and_inv(n)
        path, _ = extract_path(dec, "x")
        stages, polarity = demorgan_normalize(dec, path, "x")
        for bits in product((0, 1), repeat=3):
            assign = dict(zip(("x", "s1", "s2"), bits))
            dec_vals = eval_decomposed(dec, assign)
            v = assign["x"]
            for st in stages:
                side = dec_vals[st.side] ^ int(st.inverted)
                v = (v & side) if st.kind == AND else (v | side)
            want = eval_netlist(n, assign)["c2"]
            assert (v ^ int(polarity)) == want, bits


class TestArrivals:
    def test_modified_arrival_formula(self):
        got = modified_arrivals([(100.0, (0.0, 0.0))], (30.0, 40.0), DelayModel(10, 0.5))
        assert got == [pytest.approx((100 + 0.5 * 70) / 10)]
        assert got == [pytest.approx(13.5)]

    def test_zero_distance(self):
        assert modified_arrivals([(80.0, (3.0, 4.0))], (3.0, 4.0), MODEL) == [8.0]

    def test_equidistant_symmetry(self):
        a, b = modified_arrivals(
            [(50.0, (0.0, 10.0)), (50.0, (10.0, 0.0))], (0.0, 0.0), MODEL
        )
        assert a == b

    def test_scaling_invariance(self):
        # scaling d_gate and arrivals together leaves a-prime unchanged
        base = modified_arrivals([(100.0, (6.0, 8.0))], (0.0, 0.0), DelayModel(10, 0.5))
        scaled = modified_arrivals([(300.0, (6.0, 8.0))], (0.0, 0.0), DelayModel(30, 1.5))
        assert base == scaled

    def test_inverters_are_free(self):
        n = Netlist(
            (PathInput("x", 100.0, 0, 0),),
            (Cell("c0", "INV", ("x",), 0, 0), Cell("c1", "INV", ("c0",), 0, 0)),
            "c1",
        )
        dec = decompose_to_and_inv(n)
        arr = signal_arrivals(dec, MODEL)
        assert arr[dec.output] == 100.0


class TestChainCompress:
    def test_two_ands_collapse(self):
        stages = [Stage(AND, "a", False), Stage(AND, "b", False)]
        out = chain_compress(stages, [0.0, 0.0])
        assert len(out) == 1
        assert out[0].kind == AND
        assert out[0].arrival == 1.0
        assert isinstance(out[0].side, MappedTree)

    def test_alternating_untouched(self):
        stages = [Stage(AND, "a", False), Stage(OR, "b", True)]
        out = chain_compress(stages, [1.0, 2.0])
        assert [(o.kind, o.side, o.arrival) for o in out] == [
            (AND, MappedSignal("a", False), 1.0),
            (OR, MappedSignal("b", True), 2.0),
        ]

    def test_run_then_or(self):
        stages = [Stage(AND, "a", False), Stage(AND, "b", False), Stage(OR, "c", False)]
        out = chain_compress(stages, [0.0, 4.0, 1.0])
        assert [o.kind for o in out] == [AND, OR]
        assert out[0].arrival == 5.0  # huffman([0, 4]) = max + 1
        assert out[1].side == MappedSignal("c", False)

    def test_strict_alternation(self, rng):
        for _ in range(30):
            kinds = [rng.choice((AND, OR)) for _ in range(rng.randint(1, 10))]
            stages = [Stage(k, f"s{i}", False) for i, k in enumerate(kinds)]
            out = chain_compress(stages, [float(rng.randint(0, 5)) for _ in kinds])
            for a, b in zip(out, out[1:]):
                assert a.kind != b.kind


class TestNormalize:
    def test_paper_style_mixed_cells(self):
        n = Netlist(
            (
                PathInput("x", 100.0, 0, 0),
                PathInput("s1", 50.0, 10, 0),
                PathInput("s2", 20.0, 0, 10),
                PathInput("s3", 30.0, 5, 5),
            ),
            (
                Cell("c1", "NOR2", ("x", "s1"), 20, 20),
                Cell("c2", "OAI21", ("s2", "s3", "c1"), 30, 30),
            ),
            "c2",
        )
        assert roundtrip_ok(n, "x", MODEL)
        res = normalize(n, "x", MODEL)
        assert res.instance.m >= 2
        assert res.output_location == (30.0, 30.0)

    def test_already_aop_zero_dist(self):
        n = Netlist(
            (
                PathInput("x", 30.0, 0, 0),
                PathInput("s1", 10.0, 0, 0),
                PathInput("s2", 20.0, 0, 0),
            ),
            (
                Cell("c0", "AND2", ("x", "s1"), 0, 0),
                Cell("c1", "OR2", ("c0", "s2"), 0, 0),
            ),
            "c1",
        )
        res = normalize(n, "x", DelayModel(10.0, 0.0))
        assert res.instance.arrivals == (2.0, 1.0, 3.0)
        assert res.instance.variant == "g_star"
        assert not res.output_inverted
        assert roundtrip_ok(n, "x", DelayModel(10.0, 0.0))

    def test_single_and(self):
        n = Netlist(
            (PathInput("x", 40.0, 0, 0), PathInput("s1", 10.0, 8, 6)),
            (Cell("c0", "AND2", ("x", "s1"), 4, 3),),
            "c0",
        )
        res = normalize(n, "x", MODEL)
        assert res.instance.m == 2
        assert res.instance.variant == "g"
        assert roundtrip_ok(n, "x", MODEL)

    def test_all_inverter_path(self):
        n = Netlist(
            (PathInput("x", 10.0, 0, 0),),
            (Cell("c0", "INV", ("x",), 0, 0),),
            "c0",
        )
        res = normalize(n, "x", MODEL)
        assert res.instance.m == 1
        assert res.output_inverted
        assert res.input_map[0] == MappedSignal("x", True)
        assert roundtrip_ok(n, "x", MODEL)

    def test_random_roundtrip(self, rng):
        for _ in range(40):
            n = random_netlist(rng)
            assert roundtrip_ok(n, "x", MODEL), n
