"""
Output rendering for the CLI: CSV, JSON and human-readable reports.

CSV output starts with a ``# schema: <name> v1`` line followed by a header
row. RERs are fractions in CSV and JSON and percentages in human output.

CSV schemas:
    analytic v1      alpha,beta,tau,participation,actor,rer_analytic
    simulate v1      alpha,beta,tau,participation,actor,rer_analytic,rer_sim,stderr
    curve v1         same columns as simulate v1 (sim columns empty without --simulate)
    reference v1     case,participation,published_theory,rer_analytic,rer_sim,stderr,published_sim,pass
    sweep-<m> v1     alpha,beta,tau,participation,metric,value
    game v1             profile,nash,payoffs
    principal-agent v1  profile,attack_cooperate,attack_betray,honest,price
    ultimatum v1        p,lower,upper,price,response,proposer_payoff,responder_payoff
"""

import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import structlog

from bdslab.config import settings
from bdslab.schemas import (
    CurvePoint,
    NashResult,
    PayoffTable2,
    PoolGamePayoffs,
    PriceBounds,
    RevenueReport,
    Scenario,
    SimEstimate,
    StrategyProfile,
    SweepResult,
    ReferenceReport,
    UltimatumOutcome,
)
from bdslab.services.model import ACTORS

logger = structlog.get_logger(__name__)

FORMATS = ("csv", "json", "human")


def fmt6(value: Optional[float]) -> str:
    """Six significant digits; empty for a missing value."""
    if value is None:
        return ""
    return f"{value:.6g}"


def pct(value: Optional[float], digits: int = 2) -> str:
    if value is None or math.isnan(value):
        return "-"
    return f"{100.0 * value:.{digits}f}%"


def to_csv(schema: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# schema: {schema} v1\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def to_json(payload: Any) -> str:
    return json.dumps(payload, indent=2) + "\n"


def _scenario_cells(s: Scenario) -> List[str]:
    return [fmt6(s.alpha), fmt6(s.beta), fmt6(s.tau), fmt6(s.participation)]


def _scenario_line(s: Scenario) -> str:
    return (
        f"alpha={s.alpha:g}  beta={s.beta:g}  tau={s.tau:.6f}  "
        f"participation={s.participation:g}  p={s.betraying_power:.6g}"
    )


# ============================================================
# analytic
# ============================================================


def render_analytic(
    s: Scenario,
    report: RevenueReport,
    bounds: Optional[PriceBounds],
    rers: Mapping[str, float],
    fmt: str,
) -> str:
    if fmt == "csv":
        return to_csv(
            "analytic",
            ["alpha", "beta", "tau", "participation", "actor", "rer_analytic"],
            (_scenario_cells(s) + [actor, fmt6(rers[actor])] for actor in ACTORS if actor in rers),
        )
    if fmt == "json":
        return to_json({
            "scenario": s.model_dump(mode="json"),
            "revenue": report.model_dump(mode="json"),
            "price_bounds": bounds.model_dump(mode="json") if bounds else None,
            "rers": dict(rers),
        })

    lines = [_scenario_line(s), "", "Revenue (fraction of published reward)"]
    for name, value in report.model_dump().items():
        lines.append(f"  {name:<20} {value:.6f}")
    lines.append(f"  {'total':<20} {report.total:.6f}")
    lines.append("")
    if bounds is not None:
        lines.append(
            f"Price bounds  C2 lower={bounds.lower:.6g}  C1 upper={bounds.upper:.6g}  "
            f"feasible={'yes' if bounds.feasible else 'no'}"
        )
    else:
        lines.append("Price bounds  n/a (no trade)")
    lines.append("")
    lines.append("RER")
    for actor in ACTORS:
        if actor in rers:
            lines.append(f"  {actor:<20} {pct(rers[actor])}")
    return "\n".join(lines) + "\n"


# ============================================================
# simulate / curve
# ============================================================


def _rer_rows(
    s: Scenario,
    analytic: Mapping[str, float],
    simulated: Mapping[str, float],
    stderr: Mapping[str, float],
) -> List[List[str]]:
    return [
        _scenario_cells(s)
        + [actor, fmt6(analytic.get(actor)), fmt6(simulated.get(actor)), fmt6(stderr.get(actor))]
        for actor in ACTORS
        if actor in analytic or actor in simulated
    ]


SIM_HEADER = ["alpha", "beta", "tau", "participation", "actor", "rer_analytic", "rer_sim", "stderr"]


def render_simulation(
    s: Scenario, estimate: SimEstimate, analytic: Mapping[str, float], fmt: str
) -> str:
    simulated = {e.actor: e.rer_mean for e in estimate.actors}
    stderr = {e.actor: e.rer_stderr for e in estimate.actors}
    if fmt == "csv":
        return to_csv("simulate", SIM_HEADER, _rer_rows(s, analytic, simulated, stderr))
    if fmt == "json":
        return to_json({
            "scenario": s.model_dump(mode="json"),
            "estimate": estimate.model_dump(mode="json"),
            "analytic": dict(analytic),
        })

    t = estimate.tallies
    lines = [
        _scenario_line(s),
        f"mode={estimate.mode.value}  rounds={estimate.rounds}  replicas={estimate.replicas}  "
        f"seed={estimate.seed}",
        f"published={t.published}  withheld={t.withheld}  "
        f"withheld rate={estimate.withheld_rate:.6f}",
        "",
        f"  {'actor':<16} {'analytic':>10} {'simulated':>10} {'stderr':>9} {'z':>7}",
    ]
    for e in estimate.actors:
        reference = analytic.get(e.actor)
        z = "-"
        if reference is not None and e.rer_stderr > 0:
            z = f"{(e.rer_mean - reference) / e.rer_stderr:.2f}"
        lines.append(
            f"  {e.actor:<16} {pct(reference):>10} {pct(e.rer_mean):>10} "
            f"{pct(e.rer_stderr, 3):>9} {z:>7}"
        )
    return "\n".join(lines) + "\n"


def render_curve(points: Sequence[CurvePoint], fmt: str) -> str:
    if fmt == "csv":
        rows: List[List[str]] = []
        for point in points:
            s = Scenario(alpha=point.alpha, beta=point.beta, tau=point.tau, participation=point.participation)
            rows.extend(_rer_rows(s, point.rers, point.simulated, point.stderr))
        return to_csv("curve", SIM_HEADER, rows)
    if fmt == "json":
        return to_json([point.model_dump(mode="json") for point in points])

    simulated = any(point.simulated for point in points)
    header = f"  {'r':>5} {'bds_miner':>10} {'attacker':>10} {'victim':>10}"
    if simulated:
        header += f" {'bds_sim':>10} {'stderr':>9}"
    lines = []
    if points:
        lines.append(f"alpha={points[0].alpha:g}  beta={points[0].beta:g}  tau={points[0].tau:.6f}")
    lines.append(header)
    for point in points:
        line = (
            f"  {point.participation:>5.2f} {pct(point.rers.get('bds_miner')):>10} "
            f"{pct(point.rers['attacker_pool']):>10} {pct(point.rers['victim_pool']):>10}"
        )
        if simulated:
            line += (
                f" {pct(point.simulated.get('bds_miner')):>10}"
                f" {pct(point.stderr.get('bds_miner'), 3):>9}"
            )
        lines.append(line)
    return "\n".join(lines) + "\n"


# ============================================================
# repro-table3
# ============================================================


def render_reference_table(report: ReferenceReport, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(
            "reference",
            [
                "case",
                "participation",
                "published_theory",
                "rer_analytic",
                "rer_sim",
                "stderr",
                "published_sim",
                "pass",
            ],
            (
                [
                    cell.case,
                    fmt6(cell.participation),
                    fmt6(cell.published_theory / 100.0),
                    fmt6(cell.analytic),
                    fmt6(cell.simulated),
                    fmt6(cell.stderr),
                    fmt6(cell.published_sim / 100.0),
                    "pass" if cell.passed else "fail",
                ]
                for cell in report.cells
            ),
        )
    if fmt == "json":
        payload = report.model_dump(mode="json")
        payload["passed"] = report.passed_count
        payload["all_pass"] = report.all_pass
        return to_json(payload)

    lines = ["RER of a BDS miner (theory / simulation)"]
    if not report.analytic_only:
        lines.append(f"rounds={report.rounds}  replicas={report.replicas}  seed={report.seed}")
    by_case: Dict[str, list] = {}
    for cell in report.cells:
        by_case.setdefault(cell.case, []).append(cell)
    for case, cells in by_case.items():
        lines.append("")
        lines.append(f"Case {case}")
        lines.append("  " + " ".join(f"{100 * c.participation:>21.0f}%" for c in cells))
        lines.append("  published " + " ".join(
            f"{c.published_theory:>10.2f}/{c.published_sim:<10.2f}" for c in cells
        ))
        lines.append("  computed  " + " ".join(
            f"{100 * c.analytic:>10.2f}/"
            + (f"{100 * c.simulated:<10.2f}" if c.simulated is not None else f"{'-':<10}")
            for c in cells
        ))
        if not report.analytic_only:
            lines.append("  near pub. " + " ".join(
                f"{('yes' if c.within_published_sim else 'no'):>21}" for c in cells
            ))
        lines.append("  status    " + " ".join(
            f"{('pass' if c.passed else 'FAIL'):>21}" for c in cells
        ))
    lines.append("")
    lines.append(f"{report.passed_count}/{len(report.cells)} cells pass")
    if not report.analytic_only:
        # Reported only; not part of the pass count
        lines.append(
            f"{report.within_published_sim_count}/{len(report.cells)} simulated cells within "
            f"{report.sim_tolerance_pp:.2f} pp of the published simulation"
        )
    return "\n".join(lines) + "\n"


# ============================================================
# sweep
# ============================================================


def render_sweep(result: SweepResult, fmt: str) -> str:
    if fmt == "csv":
        return result.to_csv()
    if fmt == "json":
        return to_json(result.model_dump(mode="json"))

    g = result.grid
    lines = [
        f"metric={g.metric.value}  alpha=[{g.alpha_min:g}, {g.alpha_max:g}] step {g.alpha_step:g}  "
        f"beta=[{g.beta_min:g}, {g.beta_max:g}] step {g.beta_step:g}  "
        f"participations={','.join(f'{r:g}' for r in g.participations)}",
        f"cells evaluated={len(result.rows)}  skipped={len(result.skipped)}",
    ]
    for label, row in (("max", result.argmax), ("min", result.argmin)):
        if row is not None:
            lines.append(
                f"{label}: {row.value:.6g} at alpha={row.alpha:g} beta={row.beta:g} "
                f"r={row.participation:g} tau={row.tau:.6f}"
            )
    return "\n".join(lines) + "\n"


# ============================================================
# game
# ============================================================


def render_game_solve(
    table: Optional[PayoffTable2],
    payoffs: Mapping[str, Sequence[float]],
    nash: NashResult,
    fmt: str,
) -> str:
    equilibria = {str(e) for e in nash.equilibria}
    if fmt == "csv":
        return to_csv(
            "game",
            ["profile", "nash", "payoffs"],
            (
                [profile, "yes" if profile in equilibria else "no",
                 ";".join(fmt6(v) for v in values)]
                for profile, values in payoffs.items()
            ),
        )
    if fmt == "json":
        return to_json({
            "payoff_table": table.model_dump(mode="json") if table else None,
            "profiles": {profile: list(values) for profile, values in payoffs.items()},
            "nash": nash.model_dump(mode="json"),
        })

    lines: List[str] = []
    if table is not None:
        lines += [
            f"Two-miner payoff table (p={table.p:.6g}, q={table.q:.6g})",
            f"  {'':<10} {'q: C':>26} {'q: B':>26}",
            f"  {'p: C':<10} {table.R:>12.6g},{table.R_prime:<13.6g} {table.D:>12.6g},{table.H_prime:<13.6g}",
            f"  {'p: B':<10} {table.H:>12.6g},{table.D_prime:<13.6g} {table.L:>12.6g},{table.L_prime:<13.6g}",
            f"  H > R > D and L > R: {'yes' if table.payoff_orderings_hold else 'no'}",
            "",
        ]
    lines.append(f"Profiles checked: {nash.profiles_checked}")
    lines.append("Pure Nash equilibria: " + ("; ".join(sorted(equilibria)) or "none"))
    lines.append(f"Unique: {'yes' if nash.unique else 'no'}")
    return "\n".join(lines) + "\n"


def render_principal_agent(
    profile: StrategyProfile, pool: Optional[PoolGamePayoffs], fmt: str
) -> str:
    if fmt == "csv":
        values = (
            [pool.attack_cooperate, pool.attack_betray, pool.honest, pool.price]
            if pool is not None
            else [None] * 4
        )
        return to_csv(
            "principal-agent",
            ["profile", "attack_cooperate", "attack_betray", "honest", "price"],
            [[str(profile)] + [fmt6(v) for v in values]],
        )
    if fmt == "json":
        return to_json({
            "equilibrium": str(profile),
            "pool_payoffs": pool.model_dump(mode="json") if pool is not None else None,
        })
    lines = []
    if pool is not None:
        lines += [
            "Attacking pool revenue by branch",
            f"  Attack, all Cooperate  {pool.attack_cooperate:.6f}",
            f"  Attack, all Betray     {pool.attack_betray:.6f}  (price {pool.price:.6g})",
            f"  Honest                 {pool.honest:.6f}",
        ]
    else:
        lines.append("No infiltration: attacking is honest mining")
    lines.append(f"Subgame perfect equilibrium: ({profile})")
    return "\n".join(lines) + "\n"


def render_ultimatum(outcome: UltimatumOutcome, bounds: PriceBounds, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(
            "ultimatum",
            ["p", "lower", "upper", "price", "response", "proposer_payoff", "responder_payoff"],
            [[fmt6(bounds.p), fmt6(bounds.lower), fmt6(bounds.upper), fmt6(outcome.price),
              outcome.response.value, fmt6(outcome.proposer_payoff), fmt6(outcome.responder_payoff)]],
        )
    if fmt == "json":
        return to_json({"bounds": bounds.model_dump(mode="json"), "outcome": outcome.model_dump(mode="json")})
    return (
        f"Feasible prices for p={bounds.p:.6g}: [{bounds.lower:.6g}, {bounds.upper:.6g}]\n"
        f"Equilibrium: ({outcome.price:.6g}, {outcome.response.value})\n"
        f"  proposer (BDS miner)  {outcome.proposer_payoff:.6g}\n"
        f"  responder (victim)    {outcome.responder_payoff:.6g}\n"
    )


# ============================================================
# Output
# ============================================================


def resolve_output_path(output: str) -> Path:
    """Relative output paths land under ``settings.output_dir``."""
    path = Path(output)
    if not path.is_absolute():
        path = Path(settings.output_dir) / path
    return path


def write_output(text: str, output: Optional[str] = None) -> Optional[Path]:
    """Write to a file when ``output`` is given, to stdout otherwise."""
    if not output:
        print(text, end="")
        return None
    path = resolve_output_path(output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    logger.info("Output written", path=str(path), bytes=len(text.encode("utf-8")))
    return path
