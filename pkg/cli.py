"""Command-line entry point: ``python cli.py <command>``.

Exit codes: 0 on success (and on a proved equilibrium for ``solve``), 2 when
``solve`` returns an incumbent at its limit, 1 on any error.
"""
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
from click.core import ParameterSource

from cng.errors import CngError
from cng.metrics import format_price, price_of_aggression, price_of_security
from cng.models import (
    CngInstance,
    EquilibriumResult,
    GenSpec,
    MasterObjective,
    SolveConfig,
    SolveStatus,
    StrategyProfile,
)
from cng.oracle import best_exact_ne, min_phi
from cng.payoffs import attacker_payoff, defender_payoff, is_feasible, objective_value
from utils.instance_generator import InstanceGenerator
from utils.instance_io import InstanceStore, jsonable, read_record, write_record
from utils.report import BatchReport, batch_record
from utils.settings import configure_logging, get_settings
from utils.snapshot_ingest import SnapshotIngestor
from workflow.graph import solve as solve_equilibrium

logger = logging.getLogger(__name__)

VERIFY_TOL = 1e-9
OBJECTIVES = [objective.value for objective in MasterObjective]
GRID_EXCLUSIVE_OPTIONS = ("gamma", "eta", "dfrac", "afrac", "custom")


@contextmanager
def _reported_errors():
    """Turn library, I/O and parsing errors into a one-line message with exit code 1."""
    try:
        yield
    except CngError as e:
        raise click.ClickException(str(e)) from e
    except (OSError, ValueError) as e:
        raise click.ClickException(str(e)) from e


def _solve_config(
    instance: CngInstance,
    objective: str = MasterObjective.DEFENDER_PAYOFF.value,
    time_limit: Optional[float] = None,
    phi_increment: float = 1.0,
) -> SolveConfig:
    if time_limit is None:
        settings = get_settings()
        time_limit = settings.ingested_time_limit if instance.edges is not None else settings.time_limit
    return SolveConfig(objective=MasterObjective(objective), time_limit=time_limit, phi_increment=phi_increment)


def _parse_sizes(text: str) -> List[int]:
    try:
        sizes = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from e
    if not sizes or any(n < 1 for n in sizes):
        raise click.BadParameter(f"sizes must be positive integers, got {text!r}")
    return sizes


def _parse_adjust(values: Tuple[str, ...]) -> Optional[Dict[str, Tuple[float, float]]]:
    """Parse repeated ``role=profit,weight`` options into a multiplier table."""
    if not values:
        return None
    table = {}
    for value in values:
        try:
            role, multipliers = value.split("=", 1)
            profit, weight = (float(v) for v in multipliers.split(","))
        except ValueError as e:
            raise click.BadParameter(f"expected role=profit,weight, got {value!r}") from e
        table[role.strip()] = (profit, weight)
    return table


def _describe(result: EquilibriumResult) -> str:
    kind = "NE" if result.exact else f"Phi-NE (phi={result.phi:.6g}, {result.phi_relative:.2%} of f^d)"
    return (
        f"{result.status.value}: {kind}\n"
        f"  x     = {list(result.profile.x)}\n"
        f"  alpha = {list(result.profile.alpha)}\n"
        f"  f^d = {result.defender_value:.6g}, f^a = {result.attacker_value:.6g}, "
        f"{result.objective.value} objective = {result.objective_value:.6g}\n"
        f"  {result.iterations} iterations, {result.cuts_added} cuts, Phi_UB = {result.phi_ub_final:g}, "
        f"{result.wall_time:.2f}s"
    )


def _emit(record: Dict, output: Optional[str]) -> None:
    if output:
        write_record(record, output)
        click.echo(f"Wrote {output}")
    else:
        click.echo(json.dumps(jsonable(record), indent=2))


@click.group()
def cli():
    """Critical Node Game equilibria: generate, solve, price and verify."""
    configure_logging()


@cli.command()
@click.option("--n", "sizes", required=True, help="Number of nodes; a comma-separated list with --grid")
@click.option("--gamma", type=float, default=0.0, show_default=True, help="Attacker opportunity-cost factor")
@click.option("--eta", type=float, default=0.6, show_default=True, help="Mitigated-attack factor")
@click.option("--dfrac", type=float, default=0.30, show_default=True, help="Defender budget as a share of sum(d)")
@click.option("--afrac", type=float, default=0.10, show_default=True, help="Attacker budget as a share of sum(a)")
@click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True)
@click.option(
    "--grid", is_flag=True, help="Emit every parameter-grid combination for each size; excludes the factor options"
)
@click.option("--custom", is_flag=True, help="Allow factors and fractions off the parameter grid")
@click.option("-o", "--output", required=True, help="Instance file, or directory with --grid")
@click.pass_context
def generate(ctx, sizes, gamma, eta, dfrac, afrac, seed, grid, custom, output):
    """Generate synthetic instances."""
    n_list = _parse_sizes(sizes)
    if grid:
        given = [
            f"--{name}"
            for name in GRID_EXCLUSIVE_OPTIONS
            if ctx.get_parameter_source(name) == ParameterSource.COMMANDLINE
        ]
        if given:
            raise click.UsageError(f"--grid draws every parameter combination; drop {', '.join(given)}")
    with _reported_errors():
        if grid:
            directory = Path(output)
            count = 0
            for name, spec in InstanceGenerator.grid(n_list, seed):
                InstanceStore.save(InstanceGenerator.generate(spec), directory / name)
                count += 1
            click.echo(f"Wrote {count} instances to {directory}")
            return
        if len(n_list) != 1:
            raise click.UsageError("several sizes need --grid")
        spec = GenSpec(
            n=n_list[0],
            gamma=gamma,
            eta=eta,
            defender_budget_frac=dfrac,
            attacker_budget_frac=afrac,
            seed=seed,
            mode="custom" if custom else "grid",
        )
        InstanceStore.save(InstanceGenerator.generate(spec), output)
        click.echo(f"Wrote {output}")


@cli.command()
@click.argument("instance_file")
@click.option("--objective", type=click.Choice(OBJECTIVES), default="defender", show_default=True)
@click.option("--time-limit", type=float, default=None, help="Seconds; defaults to the configured limit")
@click.option("--phi-increment", type=float, default=1.0, show_default=True)
@click.option("-o", "--output", default=None, help="Result JSON file (printed when omitted)")
@click.pass_context
def solve(ctx, instance_file, objective, time_limit, phi_increment, output):
    """Select the objective-best equilibrium of INSTANCE_FILE."""
    with _reported_errors():
        instance = InstanceStore.load(instance_file)
        result = solve_equilibrium(instance, _solve_config(instance, objective, time_limit, phi_increment))
        click.echo(_describe(result))
        record = result.to_record()
        record["phi_relative"] = result.phi_relative
        _emit(record, output)
    ctx.exit(0 if result.status == SolveStatus.PROVED_OPTIMAL_NE else 2)


def _price_command(metric: str, instance_file: str, time_limit: Optional[float], phi_increment: float, output):
    with _reported_errors():
        instance = InstanceStore.load(instance_file)
        if metric == "pos":
            price = price_of_security(instance, _solve_config(instance, "defender", time_limit, phi_increment))
        else:
            price = price_of_aggression(instance, _solve_config(instance, "attacker", time_limit, phi_increment))
        label = "PoS" if metric == "pos" else "PoA"
        level = "exact NE" if price.best_ne.exact else f"Phi-NE, phi={price.phi:.6g}"
        click.echo(
            f"{label} = {format_price(price.value)} "
            f"({price.numerator:.6g} / {price.denominator:.6g}, {level})"
        )
        if output:
            write_record(price.to_record(), output)
            click.echo(f"Wrote {output}")


@cli.command()
@click.argument("instance_file")
@click.option("--time-limit", type=float, default=None)
@click.option("--phi-increment", type=float, default=1.0, show_default=True)
@click.option("-o", "--output", default=None, help="Full-precision JSON record")
def pos(instance_file, time_limit, phi_increment, output):
    """Price of Security of INSTANCE_FILE."""
    _price_command("pos", instance_file, time_limit, phi_increment, output)


@cli.command()
@click.argument("instance_file")
@click.option("--time-limit", type=float, default=None)
@click.option("--phi-increment", type=float, default=1.0, show_default=True)
@click.option("-o", "--output", default=None, help="Full-precision JSON record")
def poa(instance_file, time_limit, phi_increment, output):
    """Price of Aggression of INSTANCE_FILE."""
    _price_command("poa", instance_file, time_limit, phi_increment, output)


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=VERIFY_TOL, abs_tol=VERIFY_TOL)


def verify_result(instance: CngInstance, record: Dict) -> List[str]:
    """Recheck a solve result by enumeration.

    Returns:
        One message per mismatch; empty when the result checks out
    """
    settings = get_settings()
    profile = StrategyProfile(x=tuple(record["x"]), alpha=tuple(record["alpha"]))
    objective = MasterObjective(record["objective"])
    problems = []
    if not is_feasible(instance, profile):
        problems.append("profile exceeds a budget")
    f_d, f_a = defender_payoff(instance, profile), attacker_payoff(instance, profile)
    if not _close(f_d, record["defender_payoff"]):
        problems.append(f"defender payoff {record['defender_payoff']} differs from recomputed {f_d}")
    if not _close(f_a, record["attacker_payoff"]):
        problems.append(f"attacker payoff {record['attacker_payoff']} differs from recomputed {f_a}")
    phi = min_phi(instance, profile, max_n=settings.oracle_max_n)
    if not _close(phi, record["phi"]):
        problems.append(f"certified phi {record['phi']} differs from enumerated {phi}")
    if record["status"] == SolveStatus.PROVED_OPTIMAL_NE.value and record["exact"]:
        if instance.n > settings.ne_max_n:
            logger.warning(f"Skipping the best-equilibrium check: n={instance.n} exceeds {settings.ne_max_n}")
        else:
            best = best_exact_ne(instance, objective, max_n=settings.ne_max_n)
            value = objective_value(instance, profile, objective)
            if best is None:
                problems.append("result claims an exact equilibrium but enumeration finds none")
            elif not _close(value, best[1]):
                problems.append(f"objective {value} differs from the best equilibrium value {best[1]}")
    return problems


@cli.command()
@click.argument("instance_file")
@click.argument("result_file")
def verify(instance_file, result_file):
    """Check RESULT_FILE against brute-force enumeration of INSTANCE_FILE."""
    with _reported_errors():
        instance = InstanceStore.load(instance_file)
        problems = verify_result(instance, read_record(result_file))
    if problems:
        raise click.ClickException("verification failed:\n  " + "\n  ".join(problems))
    click.echo("verified")


def run_batch_instance(path: str, output_dir: str, time_limit: Optional[float], phi_increment: float) -> str:
    """Worker: both prices of one instance, written as one record file."""
    instance = InstanceStore.load(path)
    started = time.monotonic()
    pos_result = price_of_security(instance, _solve_config(instance, "defender", time_limit, phi_increment))
    poa_result = price_of_aggression(instance, _solve_config(instance, "attacker", time_limit, phi_increment))
    name = Path(path).stem
    record = batch_record(name, instance, pos_result, poa_result)
    logger.info(f"{name}: PoS {format_price(pos_result.value)}, PoA {format_price(poa_result.value)} "
                f"in {time.monotonic() - started:.2f}s")
    write_record(record, Path(output_dir) / f"{name}.json")
    return name


@cli.command()
@click.argument("instances_dir")
@click.option("-o", "--output", required=True, help="Directory for the per-instance records")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--time-limit", type=float, default=None)
@click.option("--phi-increment", type=float, default=1.0, show_default=True)
def batch(instances_dir, output, jobs, time_limit, phi_increment):
    """Compute PoS and PoA for every instance in INSTANCES_DIR."""
    paths = sorted(str(p) for p in Path(instances_dir).glob("*.json"))
    if not paths:
        raise click.ClickException(f"no instance files in {instances_dir}")
    Path(output).mkdir(parents=True, exist_ok=True)

    failures = []
    if jobs == 1:
        for path in paths:
            try:
                click.echo(run_batch_instance(path, output, time_limit, phi_increment))
            except (CngError, OSError, ValueError) as e:
                logger.error(f"Batch instance {path} failed: {str(e)}")
                failures.append(path)
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                pool.submit(run_batch_instance, path, output, time_limit, phi_increment): path for path in paths
            }
            for future in as_completed(futures):
                try:
                    click.echo(future.result())
                except Exception as e:
                    logger.error(f"Batch instance {futures[future]} failed: {str(e)}")
                    failures.append(futures[future])
    if failures:
        raise click.ClickException(f"{len(failures)} of {len(paths)} instances failed")
    click.echo(f"Wrote {len(paths)} records to {output}")


@cli.command()
@click.argument("batch_dir")
@click.option("--group-by", type=click.Choice(["n", "params"]), default="n", show_default=True)
@click.option("-o", "--output", default=None, help="CSV file (printed when omitted)")
def report(batch_dir, group_by, output):
    """Aggregate the records of a batch run into a CSV table."""
    with _reported_errors():
        table = BatchReport.build(BatchReport.load_records(batch_dir), group_by=group_by)
        if output:
            BatchReport.write(table, output)
            click.echo(BatchReport.summary(table))
        else:
            click.echo(table.to_csv(index=False), nl=False)


@cli.command()
@click.argument("snapshot_file")
@click.option("--gamma", type=float, default=0.0, show_default=True)
@click.option("--eta", type=float, default=0.6, show_default=True)
@click.option("--dfrac", type=float, default=0.30, show_default=True)
@click.option("--afrac", type=float, default=0.10, show_default=True)
@click.option("--defender-adjust", multiple=True, help="role=profit,weight multipliers on the defender side")
@click.option("--attacker-adjust", multiple=True, help="role=profit,weight multipliers on the attacker side")
@click.option("-o", "--output", required=True, help="Instance file")
def ingest(snapshot_file, gamma, eta, dfrac, afrac, defender_adjust, attacker_adjust, output):
    """Build an instance from a traffic snapshot."""
    defender_table = _parse_adjust(defender_adjust)
    attacker_table = _parse_adjust(attacker_adjust)
    with _reported_errors():
        instance = SnapshotIngestor.ingest(
            SnapshotIngestor.load(snapshot_file),
            gamma=gamma,
            eta=eta,
            defender_budget_frac=dfrac,
            attacker_budget_frac=afrac,
            defender_adjust=defender_table,
            attacker_adjust=attacker_table,
        )
        InstanceStore.save(instance, output)
        click.echo(f"Wrote {output} ({instance.n} nodes)")


if __name__ == "__main__":
    cli()
