#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Report Generator - 报告生成模块
负责组装 JSON 报告（结果与耗时分离），并可渲染为 Markdown 摘要
"""

import logging
from datetime import datetime
from typing import Any, Dict, List, Mapping, Optional

from src.utils.serialization import check_result_to_dict, config_hash, jsonable

logger = logging.getLogger(__name__)


def build_report(command: Mapping, inputs: Mapping, checks: Optional[List[Mapping]] = None,
                 exact: Optional[Mapping] = None, estimates: Optional[Mapping] = None,
                 claims: Optional[List] = None, verdict: str = "pass",
                 timings: Optional[Mapping] = None) -> Dict[str, Any]:
    """Assemble a report; everything under "results" is reproducible byte for byte."""
    inputs = dict(jsonable(inputs))
    inputs.setdefault("config_hash", config_hash({"command": command, **inputs}))
    results = {
        "checks": [
            {"name": c["name"], **check_result_to_dict(c["result"])} for c in (checks or [])
        ],
        "exact": jsonable(exact or {}),
        "estimates": jsonable(estimates or {}),
        "claims": jsonable(claims or []),
    }
    return {
        "command": jsonable(command),
        "inputs": inputs,
        "results": results,
        "verdict": verdict,
        "timings": jsonable(timings or {}),
    }


def generate_report(report: Mapping, date_str: Optional[str] = None) -> str:
    """Render a report as a Markdown summary."""
    date_str = date_str or datetime.now().strftime("%Y-%m-%d")
    command = report.get("command", {})
    title = command.get("scenario") or command.get("command") or "report"
    lines = [
        f"# Tourney Lab Report: {title}",
        f"**日期:** {date_str}",
        f"**结论:** {report.get('verdict', '?').upper()}",
    ]
    if command.get("anchor"):
        lines.append(f"**Claim:** {command['anchor']}")
    lines += ["", "---", ""]

    results = report.get("results", {})

    lines.append("## Claims")
    claims = results.get("claims") or []
    if claims:
        lines.append("| | claim | kind | expected | computed |")
        lines.append("|---|---|---|---|---|")
        for c in claims:
            mark = "✅" if c.get("passed") else "❌"
            lines.append(f"| {mark} | {c.get('name')} | {c.get('kind')} | {_cell(c.get('expected'))} "
                         f"| {_cell(c.get('computed'))} |")
        lines.append("")
    else:
        lines.append("*暂无数据*\n")

    lines.append("## Checks")
    checks = results.get("checks") or []
    if checks:
        for c in checks:
            lines.append(f"- **{c.get('name', c.get('property'))}**: {c.get('property')} {c.get('verdict')}")
            witness = c.get("witness")
            if witness and witness.get("type") == "orthant":
                lines.append(f"  - {witness['mode']} orthant at {witness['thresholds']}: "
                             f"{witness['lhs']} > {witness['rhs']}")
            elif witness and witness.get("type") == "monotone_pair":
                lines.append(f"  - blocks {witness['A1']} | {witness['A2']}: covariance {witness['covariance']}")
        lines.append("")
    else:
        lines.append("*暂无数据*\n")

    estimates = results.get("estimates") or {}
    if estimates:
        lines.append("## Estimates")
        for name, e in estimates.items():
            lo, hi = e["ci"]
            lines.append(f"- {name}: {e['estimate']:.5f} (SE {e['se']:.5f}, "
                         f"{e['level']:.0%} CI [{lo:.5f}, {hi:.5f}], {e['reps']} reps, seed {e['seed']})")
        lines.append("")

    timings = report.get("timings") or {}
    if timings:
        lines.append("---")
        lines.append("*" + ", ".join(f"{k}: {v}" for k, v in timings.items()) + "*")

    return "\n".join(lines)


def _cell(value) -> str:
    if value is None:
        return ""
    text = str(value)
    return text if len(text) <= 60 else text[:57] + "..."


__all__ = ["build_report", "generate_report"]
