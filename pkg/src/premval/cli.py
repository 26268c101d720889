"""Command-line interface.

Exit codes: 0 on success, 1 on a validation failure, 2 on an I/O or parse
failure.  Reports are deterministic: identical inputs produce byte-identical
output.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from . import fixtures
from .cashflow import (CashflowMatrix, accelerated_benefit, build_cashflow, ceased_cover_states,
                       dread_disease_case, load_cashflow_file, premium_outflow, split)
from .errors import ParseError, PremvalError, ValidationError
from .lifetable import (diagonal_residuals, distribution_matrix, infer_reflex_columns, load_table,
                        pattern_violations, transition_sequence, unit_distribution)
from .oracle import mc_pv, simulate
from .statemodel import (UNREACHABLE, extend_model, format_model, load_model_file, shortest_arrival,
                         validate_model)
from .valuation import (annuity_due, constant_rate_discount, equivalence_residual, expected_pv,
                        load_discount_file, net_single_premium, period_premium)


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs of a valuation run."""

    model_path: str
    table_path: str
    rate: "float | None" = None
    discount_path: "str | None" = None
    accel: "float | None" = None
    case: "int | None" = None
    cashflow_path: "str | None" = None
    mode: str = "single"
    m: "int | None" = None
    pay_states: "frozenset[int] | None" = None
    initial_state: "int | None" = None

    def __post_init__(self):
        if (self.rate is None) == (self.discount_path is None):
            raise ValidationError("pass exactly one discount source: --rate or --discount-file")
        sources = [x is not None for x in (self.accel, self.case, self.cashflow_path)]
        if sum(sources) != 1:
            raise ValidationError("pass exactly one contract source: --accel, --case or --cashflow")
        if self.mode not in ("single", "period"):
            raise ValidationError(f"unknown mode {self.mode!r}")
        if self.mode == "period" and (self.m is None or not self.pay_states):
            raise ValidationError("period mode requires --m and --pay-states")


def _parse_pay_states(text: "str | None") -> "frozenset[int] | None":
    if text is None:
        return None
    try:
        states = frozenset(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ValidationError(f"bad --pay-states {text!r}: {exc}") from exc
    if not states:
        raise ValidationError("--pay-states is empty")
    return states


def _config_from_args(args) -> RunConfig:
    return RunConfig(
        model_path=args.model,
        table_path=args.table,
        rate=args.rate,
        discount_path=args.discount_file,
        accel=getattr(args, "accel", None),
        case=getattr(args, "case", None),
        cashflow_path=getattr(args, "cashflow", None),
        mode="period" if getattr(args, "period", False) else "single",
        m=getattr(args, "m", None),
        pay_states=_parse_pay_states(getattr(args, "pay_states", None)),
        initial_state=getattr(args, "initial", None),
    )


def _load_inputs(model_path, table_path, rate, discount_path, initial_state):
    """Load model and table, build distribution, discount and offsets."""
    if (rate is None) == (discount_path is None):
        raise ValidationError("pass exactly one discount source: --rate or --discount-file")
    parsed = load_model_file(model_path)
    model = parsed.model
    table = infer_reflex_columns(load_table(table_path, model), model)
    seq = transition_sequence(table, model)
    initial = unit_distribution(model.n_states, initial_state or model.initial_state)
    dist = distribution_matrix(seq, initial)
    if rate is not None:
        discount = constant_rate_discount(table.n, rate=rate)
    else:
        discount = load_discount_file(discount_path, table.n)
    offsets = shortest_arrival(model)
    return model, table, seq, dist, discount, offsets


def _load_chain(config: RunConfig):
    return _load_inputs(config.model_path, config.table_path, config.rate,
                        config.discount_path, config.initial_state)


def _contract_inflows(config: RunConfig, n: int, n_states: int) -> CashflowMatrix:
    if config.accel is not None:
        return accelerated_benefit(config.accel, n)
    if config.case is not None:
        return dread_disease_case(config.case, n)
    entries = load_cashflow_file(config.cashflow_path)
    return build_cashflow(entries, n, n_states)


def _print_matrix_csv(matrix: np.ndarray, precision: int, header: "list[str] | None" = None):
    if header:
        print(",".join(header))
    for row in matrix:
        print(",".join(f"{value:.{precision}g}" for value in row))


# --------------------------------------------------------------------------
# subcommand handlers
# --------------------------------------------------------------------------


def _cmd_validate(args) -> int:
    parsed = load_model_file(args.model)
    problems = validate_model(parsed.model)
    for (i, j) in sorted(parsed.lump_sums):
        if (i, j) not in parsed.model.transitions:
            problems.append(f"lump sum on missing transition ({i}, {j})")
    for s in sorted(parsed.attachments):
        if not 1 <= s <= parsed.model.n_states:
            problems.append(f"attachment on unknown state {s}")
    if problems:
        for problem in problems:
            print(problem)
        return 1
    print(f"ok: {parsed.model.n_states} states, {len(parsed.model.transitions)} transitions")
    return 0


def _cmd_extend(args) -> int:
    parsed = load_model_file(args.model)
    extended, attachments = extend_model(parsed.model, parsed.lump_sums)
    text = format_model(extended, attachments=attachments)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        print(text, end="")
    plus = sorted(extended.plus_state_origin)
    print(f"extended: {parsed.model.n_states} -> {extended.n_states} states; "
          f"plus states {plus or 'none'}; attachments at {sorted(attachments) or 'none'}",
          file=sys.stderr)
    return 0


def _cmd_delta(args) -> int:
    parsed = load_model_file(args.model)
    offsets = shortest_arrival(parsed.model)
    for state in range(1, parsed.model.n_states + 1):
        value = offsets.offset(state)
        print(f"{state} {'inf' if value is UNREACHABLE else value}")
    return 0


def _cmd_table_check(args) -> int:
    parsed = load_model_file(args.model)
    model = parsed.model
    table = infer_reflex_columns(load_table(args.table, model), model)
    seq = transition_sequence(table, model)
    violations = pattern_violations(seq, model)
    if violations:
        k, i, j = violations[0]
        raise ValidationError(f"nonzero probability outside the allowed pattern at k={k}, ({i}, {j})")
    distribution_matrix(seq, unit_distribution(model.n_states, model.initial_state))
    residuals = diagonal_residuals(table, model)
    print(f"ok: horizon {table.n}, {model.n_states} states, "
          f"{len(table.occupancy)} occupancy and {len(table.decrements)} decrement columns")
    print(f"row sums of Q and D within 1e-12; {len(residuals)} period/state cells "
          f"show entrant or exit flow under the alternative diagonal convention")
    return 0


def _cmd_dist(args) -> int:
    parsed = load_model_file(args.model)
    model = parsed.model
    table = infer_reflex_columns(load_table(args.table, model), model)
    seq = transition_sequence(table, model)
    initial = unit_distribution(model.n_states, args.initial or model.initial_state)
    dist = distribution_matrix(seq, initial)
    header = ["k"] + [f"state_{j}" for j in range(1, model.n_states + 1)]
    print(",".join(header))
    for k, row in enumerate(dist.matrix):
        print(",".join([str(k)] + [f"{p:.{args.precision}g}" for p in row]))
    return 0


def _cmd_cashflow(args) -> int:
    if args.builder == "accel":
        c = accelerated_benefit(args.lam, args.n)
    elif args.builder == "case":
        c = dread_disease_case(args.id, args.n)
    else:
        entries = load_cashflow_file(args.flows)
        c = build_cashflow(entries, args.n, args.states)
    _print_matrix_csv(c.matrix, args.precision)
    return 0


def _cmd_premium(args) -> int:
    config = _config_from_args(args)
    model, table, seq, dist, discount, offsets = _load_chain(config)
    c_in = _contract_inflows(config, table.n, model.n_states)
    if config.mode == "single":
        result = net_single_premium(c_in, dist, discount)
        print(f"net single premium: {result.value:.{args.precision}f}")
    else:
        result = period_premium(c_in, dist, discount, config.pay_states, offsets, config.m)
        states = ",".join(str(s) for s in sorted(result.pay_states))
        print(f"net period premium (states {{{states}}}, m={result.m}): {result.value:.{args.precision}f}")
        print(f"  benefit value {result.numerator:.{args.precision}f} / "
              f"annuity value {result.denominator:.{args.precision}f}")
    return 0


def _cmd_annuity(args) -> int:
    model, table, seq, dist, discount, offsets = _load_inputs(
        args.model, args.table, args.rate, args.discount_file, args.initial)
    value = annuity_due(dist, discount, args.state, args.from_k, args.to_k)
    print(f"annuity value, state {args.state}, [{args.from_k}, {args.to_k}): {value:.{args.precision}f}")
    return 0


def _cmd_check(args) -> int:
    config = _config_from_args(args)
    model, table, seq, dist, discount, offsets = _load_chain(config)
    c_in = _contract_inflows(config, table.n, model.n_states)
    if config.mode == "single":
        outflow = np.zeros_like(c_in.matrix)
        state = config.initial_state or model.initial_state
        outflow[0, state - 1] = -args.premium
        c_out = CashflowMatrix(outflow)
    else:
        c_out = premium_outflow(args.premium, config.pay_states, offsets, config.m,
                                table.n, model.n_states)
    residual = equivalence_residual(c_in, c_out, dist, discount)
    benefit = expected_pv(c_in, dist, discount)
    print(f"equivalence residual: {residual:.3e} (benefit value {benefit:.{args.precision}f})")
    return 0


def _cmd_simulate(args) -> int:
    config = _config_from_args(args)
    model, table, seq, dist, discount, offsets = _load_chain(config)
    c_in = _contract_inflows(config, table.n, model.n_states)
    initial = unit_distribution(model.n_states, config.initial_state or model.initial_state)
    ensemble = simulate(seq, initial, args.paths, args.seed, chunk_size=args.chunk_size)
    estimate = mc_pv(ensemble, c_in, discount)
    exact = expected_pv(c_in, dist, discount)
    gap = abs(estimate.mean - exact)
    z = gap / estimate.std_error if estimate.std_error > 0 else 0.0
    print(f"matrix value:    {exact:.{args.precision}f}")
    print(f"simulated mean:  {estimate.mean:.{args.precision}f}  "
          f"(SE {estimate.std_error:.3e}, {estimate.n_paths} paths, seed {args.seed})")
    print(f"difference:      {gap:.3e}  ({z:.2f} standard errors)")
    return 0


_DEMO_LAMBDAS = (0.001, 0.25, 0.5, 0.75, 1.0)
_DEMO_PAY_SETS = (frozenset({1}), frozenset({1, 2}), frozenset({1, 2, 3, 4, 5, 6}))
_DEMO_RATE = 0.01


def _demo_chain():
    model = fixtures.dread_disease_model()
    table = load_table(fixtures.bundled_path(fixtures.TABLE_FILE), model, entry_age=fixtures.ENTRY_AGE)
    table = infer_reflex_columns(table, model)
    seq = transition_sequence(table, model)
    dist = distribution_matrix(seq, unit_distribution(model.n_states, model.initial_state))
    discount = constant_rate_discount(table.n, rate=_DEMO_RATE)
    offsets = shortest_arrival(model)
    return model, table, dist, discount, offsets


def _demo_row(label, c_in, dist, discount, offsets, m, precision, ceased=frozenset()):
    cells = [label, f"{net_single_premium(c_in, dist, discount).value:.{precision}f}"]
    for pay in _DEMO_PAY_SETS:
        if pay & ceased:
            cells.append("—")
        else:
            cells.append(f"{period_premium(c_in, dist, discount, pay, offsets, m).value:.{precision}f}")
    return cells


def _print_table(rows, fmt):
    if fmt == "csv":
        for row in rows:
            print(",".join(row))
        return
    widths = [max(len(row[i]) for row in rows) for i in range(len(rows[0]))]
    for row in rows:
        print("  ".join(cell.ljust(width) for cell, width in zip(row, widths)))


def _cmd_demo(args) -> int:
    model, table, dist, discount, offsets = _demo_chain()
    m = table.n
    print(f"dread-disease demo [{args.scenario}] on the bundled SYNTHETIC table "
          f"(entry age {fixtures.ENTRY_AGE}, horizon {table.n} years, rate {_DEMO_RATE:.0%}, m={m})")
    header = ["", "single", "p{1}", "p{1,2}", "p{1-6}"]
    rows = [header]
    if args.scenario == "accel":
        header[0] = "lambda"
        for lam in _DEMO_LAMBDAS:
            c_in = accelerated_benefit(lam, table.n)
            rows.append(_demo_row(f"{lam:g}", c_in, dist, discount, offsets, m,
                                  args.precision, ceased_cover_states(lam)))
    else:
        header[0] = "case"
        case = int(args.scenario[-1])
        c_in = dread_disease_case(case, table.n)
        rows.append(_demo_row(str(case), c_in, dist, discount, offsets, m, args.precision))
    _print_table(rows, args.format)
    return 0


def _cmd_fixtures(args) -> int:
    for path in fixtures.write_fixture_files(args.out):
        print(path)
    return 0


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _add_discount_options(parser):
    parser.add_argument("--rate", type=float, help="constant yearly interest rate")
    parser.add_argument("--discount-file", help="file with n+1 discount factors, first must be 1")


def _add_contract_options(parser):
    parser.add_argument("--accel", type=float, metavar="LAMBDA",
                        help="accelerated benefit with the given accelerated share")
    parser.add_argument("--case", type=int, choices=(1, 2, 3), help="additional-benefit case")
    parser.add_argument("--cashflow", help="cash-flow file (flow <state> <k1> <k2> <amount>)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="premval",
                                     description="Multistate insurance valuation by the matrix method")
    parser.add_argument("--precision", type=int, default=5, help="decimal places in reports")
    parser.add_argument("--format", choices=("plain", "csv"), default="plain", help="tabular output format")
    parser.add_argument("--seed", type=int, default=0, help="default master seed for simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a model file")
    p.add_argument("model")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("extend", help="rewrite transition lump sums onto plus states")
    p.add_argument("model")
    p.add_argument("-o", "--output", help="write the extended model here instead of stdout")
    p.set_defaults(func=_cmd_extend)

    p = sub.add_parser("delta", help="earliest arrival time of every state")
    p.add_argument("model")
    p.set_defaults(func=_cmd_delta)

    table_parser = sub.add_parser("table", help="life-table operations")
    table_sub = table_parser.add_subparsers(dest="table_command", required=True)
    p = table_sub.add_parser("check", help="validate a table against a model")
    p.add_argument("model")
    p.add_argument("table")
    p.set_defaults(func=_cmd_table_check)

    p = sub.add_parser("dist", help="print the occupancy distribution as CSV")
    p.add_argument("model")
    p.add_argument("table")
    p.add_argument("--initial", type=int, help="initial state (default: the model's)")
    p.set_defaults(func=_cmd_dist)

    cashflow_parser = sub.add_parser("cashflow", help="emit a cash-flow matrix as CSV")
    cashflow_sub = cashflow_parser.add_subparsers(dest="builder", required=True)
    p = cashflow_sub.add_parser("accel", help="accelerated death benefit")
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="accelerated share in [0, 1]")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_cashflow, builder="accel")
    p = cashflow_sub.add_parser("case", help="additional-benefit case")
    p.add_argument("--id", type=int, choices=(1, 2, 3), required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(func=_cmd_cashflow, builder="case")
    p = cashflow_sub.add_parser("build", help="build from a cash-flow file")
    p.add_argument("--flows", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--states", type=int, required=True)
    p.set_defaults(func=_cmd_cashflow, builder="build")

    p = sub.add_parser("premium", help="net single or period premium")
    p.add_argument("--model", required=True)
    p.add_argument("--table", required=True)
    _add_discount_options(p)
    _add_contract_options(p)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--single", action="store_true", help="net single premium")
    mode.add_argument("--period", action="store_true", help="net period premium")
    p.add_argument("--m", type=int, help="premiums payable at times 0..m-1")
    p.add_argument("--pay-states", help="comma-separated premium states, e.g. 1,2")
    p.add_argument("--initial", type=int, help="initial state (default: the model's)")
    p.set_defaults(func=_cmd_premium)

    p = sub.add_parser("annuity", help="state-conditional annuity value")
    p.add_argument("--model", required=True)
    p.add_argument("--table", required=True)
    _add_discount_options(p)
    p.add_argument("--state", type=int, required=True)
    p.add_argument("--from", dest="from_k", type=int, required=True)
    p.add_argument("--to", dest="to_k", type=int, required=True)
    p.add_argument("--initial", type=int, help="initial state (default: the model's)")
    p.set_defaults(func=_cmd_annuity)

    p = sub.add_parser("check", help="equivalence residual of a quoted premium")
    p.add_argument("--model", required=True)
    p.add_argument("--table", required=True)
    _add_discount_options(p)
    _add_contract_options(p)
    p.add_argument("--premium", type=float, required=True)
    p.add_argument("--period", action="store_true", help="treat the premium as a period premium")
    p.add_argument("--m", type=int)
    p.add_argument("--pay-states")
    p.add_argument("--initial", type=int)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("simulate", help="cross-check the matrix value by simulation")
    p.add_argument("--model", required=True)
    p.add_argument("--table", required=True)
    _add_discount_options(p)
    _add_contract_options(p)
    p.add_argument("--paths", type=int, required=True)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="master seed (falls back to the global --seed)")
    p.add_argument("--chunk-size", type=int, default=1 << 16)
    p.add_argument("--initial", type=int)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("demo", help="premium tables for the bundled SYNTHETIC fixture")
    p.add_argument("scenario", choices=("accel", "case1", "case2", "case3"))
    p.set_defaults(func=_cmd_demo)

    p = sub.add_parser("fixtures", help="write the bundled example files to a directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fixtures)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PremvalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
