from dataclasses import replace
from typing import List

from src.grasp_driver.utility import EXIT_OK, print_resolved
from src.grasp_evalbench.evaluate import (
    SamplerSpec,
    evaluate,
    parse_steps_list,
)
from src.grasp_evalbench.latency import bench_latency, fit_call_cost
from src.grasp_evalbench.report import emit_report, render_table
from src.grasp_trainer.checkpoint import load_checkpoint
from src.synthetic_scenes.dataset import load_dataset


def _sampler_specs(args, section) -> List[SamplerSpec]:
    steps_list = args.steps_list or section.get("steps_list", "1,3,10")
    ddpm_steps = args.ddpm_steps
    if ddpm_steps is None:
        ddpm_steps = section.get("ddpm_steps", "")
    specs = [
        SamplerSpec("consistency", p) for p in parse_steps_list(steps_list)
    ]
    if ddpm_steps.strip():
        specs += [SamplerSpec("ddpm", s) for s in parse_steps_list(ddpm_steps)]
    return specs


def _run(args, app_config, logger, with_latency: bool) -> int:
    section = app_config["evalbench"]
    state = load_checkpoint(args.checkpoint)
    dataset = load_dataset(args.data)
    specs = _sampler_specs(args, section)
    threads = args.threads or section.getint("threads", 1)
    resolved = {
        "checkpoint": args.checkpoint,
        "config_hash": state.config_hash,
        "data": args.data,
        "samplers": [f"{s.sampler_id}:{s.steps}" for s in specs],
        "seed": args.seed,
        "threads": threads,
    }
    if with_latency:
        trials = args.trials or section.getint("trials", 30)
        warmup = args.warmup
        if warmup is None:
            warmup = section.getint("warmup", 5)
        resolved.update({"trials": trials, "warmup": warmup})
    print_resolved(args.command, resolved)

    reports = [
        evaluate(state, dataset.samples, spec, args.seed, threads)
        for spec in specs
    ]
    if with_latency:
        logger.info("Measuring latency on the first sample, single-threaded")
        rows = bench_latency(
            state, specs, dataset.samples[0], trials, warmup, args.seed
        )
        reports = [
            replace(report, latency_median=row.median, latency_p95=row.p95)
            for report, row in zip(reports, rows)
        ]
        consistency = [s for s in specs if s.kind == "consistency"]
        if len({s.network_calls for s in consistency}) > 1:
            cost = fit_call_cost(rows, consistency)
            logger.info(
                f"Consistency latency: {cost.overhead:.6f} s + "
                f"{cost.per_call:.6f} s per network call"
            )
    csv_path, txt_path = emit_report(reports, args.out)
    print(render_table(reports), end="")
    print(f"reports: {csv_path}, {txt_path}")
    return EXIT_OK


def eval_command(args, app_config, logger) -> int:
    return _run(args, app_config, logger, with_latency=False)


def bench_command(args, app_config, logger) -> int:
    return _run(args, app_config, logger, with_latency=True)
