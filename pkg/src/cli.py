"""命令行入口"""

import sys
from pathlib import Path
from typing import Optional

import typer

from . import parallel
from .config import Config, load_config
from .errors import RigidityError
from .experiment import ResultCache, SuiteContext, load_experiment, render, run, setup_logging, verify
from .experiment.suites import SUITES

app = typer.Typer(name="rigidity-lab", help="T³ 上 Anosov 微分同胚刚性的数值实验室")
cache_app = typer.Typer(help="阶段结果缓存")
app.add_typer(cache_app, name="cache")


def _prepare(config_path: Optional[Path], quiet: bool, jobs: Optional[int] = None) -> Config:
    config = load_config(config_path) if config_path else load_config()
    setup_logging(config.logging, quiet=quiet, logs_dir=Path(config.paths.logs_dir))
    parallel.configure(jobs=jobs or config.runtime.jobs, progress=config.runtime.progress and not quiet)
    return config


def _fail(e: Exception) -> None:
    if isinstance(e, RigidityError):
        typer.secho(f"错误: {e}", fg=typer.colors.RED, err=True)
        for key, value in e.details.items():
            typer.secho(f"  {key}: {value}", fg=typer.colors.RED, err=True)
        sys.exit(e.exit_code)
    typer.secho(f"未预期的错误: {type(e).__name__}: {e}", fg=typer.colors.RED, err=True)
    sys.exit(1)


@app.command("run")
def run_command(
    experiment: Optional[Path] = typer.Argument(None, help="实验 YAML（覆盖 config.yaml 中的数值段）"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="全局配置文件"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="产物目录"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="并行线程数"),
    tol_scale: Optional[float] = typer.Option(None, "--tol-scale", help="验收容差缩放因子"),
    no_cache: bool = typer.Option(False, "--no-cache", help="不读写缓存"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="只输出警告与结果"),
):
    """运行一个实验，写出 CSV/JSON 产物、manifest.json 与 report.md"""
    try:
        config = _prepare(config_path, quiet, jobs)
        exp = load_experiment(experiment, config)
        if seed is not None:
            exp = exp.with_seed(seed)
        exp = exp.with_tol_scale(tol_scale or config.runtime.tol_scale)
        out_dir = out or Path(config.paths.output_dir) / f"{exp.experiment.kind}-{exp.digest[:12]}"
        cache = ResultCache(Path(config.paths.cache_dir), enabled=not no_cache)

        typer.secho(f"运行实验: {exp.experiment.kind} (digest {exp.digest[:12]})", fg=typer.colors.CYAN)
        manifest = run(exp, out_dir, cache, jobs=jobs or config.runtime.jobs, templates_dir=Path(config.paths.templates_dir))
    except Exception as e:
        _fail(e)
        return

    for stage in manifest.stages:
        typer.echo(f"  {stage.name:<14} {stage.status:<7} {stage.seconds:8.2f}s")
    typer.secho(f"\n产物已写入: {out_dir}", fg=typer.colors.GREEN)


@app.command("verify")
def verify_command(
    suite: str = typer.Argument("all", help=f"套件名或 all: {', '.join(SUITES)}"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="全局配置文件"),
    seed: Optional[int] = typer.Option(None, "--seed", help="随机种子"),
    jobs: Optional[int] = typer.Option(None, "--jobs", "-j", help="并行线程数"),
    tol_scale: Optional[float] = typer.Option(None, "--tol-scale", help="容差缩放因子"),
    samples: Optional[int] = typer.Option(None, "--samples", help="覆盖各套件的验收采样点数"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="把摘要另存为 markdown"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="只输出警告与结果"),
):
    """运行桌面规模的验收套件；任一检查失败即非零退出"""
    if suite != "all" and suite not in SUITES:
        typer.secho(f"未知套件: {suite}", fg=typer.colors.RED, err=True)
        sys.exit(2)
    try:
        config = _prepare(config_path, quiet, jobs)
        exp = load_experiment(None, config)
        if seed is not None:
            exp = exp.with_seed(seed)
        ctx = SuiteContext(exp, tol_scale or config.runtime.tol_scale, jobs or config.runtime.jobs, samples)
        results = verify([suite], ctx)
        summary = render("verify_summary.md.j2", Path(config.paths.templates_dir), results=results, scale=ctx.scale)
    except Exception as e:
        _fail(e)
        return

    typer.echo(summary)
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(summary, encoding="utf-8")

    code = max((r.exit_code for r in results), default=0)
    if code:
        failed = [r.name for r in results if not r.passed]
        typer.secho(f"未通过: {', '.join(failed)}", fg=typer.colors.RED, err=True)
        sys.exit(code)
    typer.secho("全部通过", fg=typer.colors.GREEN)


@cache_app.command("inspect")
def cache_inspect(
    config_path: Optional[Path] = typer.Option(None, "--config", help="全局配置文件"),
):
    """列出缓存条目及大小"""
    try:
        config = _prepare(config_path, quiet=True)
    except Exception as e:
        _fail(e)
        return
    entries = ResultCache(Path(config.paths.cache_dir)).inspect()
    typer.secho(f"缓存目录: {config.paths.cache_dir}", fg=typer.colors.CYAN)
    for entry in entries:
        typer.echo(f"  {entry.size:>10}  {entry.name}")
    typer.echo(f"共 {len(entries)} 项")


@cache_app.command("clear")
def cache_clear(
    prefix: str = typer.Argument("", help="只删除以此开头的条目（通常是阶段名）"),
    config_path: Optional[Path] = typer.Option(None, "--config", help="全局配置文件"),
):
    """删除缓存条目"""
    try:
        config = _prepare(config_path, quiet=True)
    except Exception as e:
        _fail(e)
        return
    removed = ResultCache(Path(config.paths.cache_dir)).clear(prefix)
    typer.secho(f"已删除 {removed} 项", fg=typer.colors.GREEN)


@app.command()
def config_show(
    config_path: Optional[Path] = typer.Option(None, "--config", help="全局配置文件"),
):
    """显示当前配置"""
    try:
        config = _prepare(config_path, quiet=True)
    except Exception as e:
        _fail(e)
        return

    typer.secho("当前配置:", fg=typer.colors.CYAN)

    typer.secho("\n映射:", fg=typer.colors.YELLOW)
    typer.echo(f"  矩阵: {config.map.matrix}")
    typer.echo(f"  扰动项: {len(config.map.perturbation)}")
    typer.echo(f"  共轭: {'启用' if config.conjugacy.enabled else '未启用'}")

    typer.secho("\n实验:", fg=typer.colors.YELLOW)
    typer.echo(f"  类型: {config.experiment.kind}")
    typer.echo(f"  余圈: {config.experiment.cocycle.kind}")
    typer.echo(f"  种子: {config.experiment.seed}")
    typer.echo(f"  完整容差: {config.holonomy.tolerance}")

    typer.secho("\n运行:", fg=typer.colors.YELLOW)
    typer.echo(f"  并行线程: {config.runtime.jobs}")
    typer.echo(f"  容差缩放: {config.runtime.tol_scale}")
    typer.echo(f"  缓存目录: {config.paths.cache_dir}")
    typer.echo(f"  输出目录: {config.paths.output_dir}")


def main():
    app()


if __name__ == "__main__":
    main()
