import pandas as pd
from rich.console import Console
from rich.progress import (
    BarColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.table import Table

console = Console()


def print_info(message: str):
    console.print(f"[bold blue]{message}[/]")


def print_success(message: str):
    console.print(f"[bold green]{message}[/]")


def print_warning(message: str):
    console.print(f"[bold yellow]warning:[/] {message}")


def print_error(message: str):
    # the CLI promises a one-line diagnostic
    short_message = message.split("\n")[0][:400] + ("..." if len(message) > 400 else "")
    console.print(f"[bold red]error:[/] {short_message}")


def print_table(df: pd.DataFrame, title: str | None = None, float_digits: int = 6):
    table = Table(title=title)
    for column in df.columns:
        table.add_column(str(column))
    for row in df.itertuples(index=False):
        table.add_row(
            *(f"{v:.{float_digits}g}" if isinstance(v, float) else str(v) for v in row)
        )
    console.print(table)


def progress_bar(quiet: bool = False) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TextColumn("[progress.percentage]{task.percentage:>3.0f}%"),
        TimeElapsedColumn(),
        console=console,
        disable=quiet,
    )
