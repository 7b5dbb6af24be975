"""
Refit logger with TQDM progress bar and Rich table support.

This module provides the RefitLogger class for displaying progress of a
batch of exact refits (one per weight vector) with a TQDM progress bar
and periodic Rich tables of solver diagnostics.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from rich.console import Console
from rich.table import Table
from tqdm import tqdm

if TYPE_CHECKING:
    from types import TracebackType


class RefitLogger:
    """
    Refit logger with progress bar and table output.

    Example:
        with RefitLogger(total=len(weights), progress_bar=True) as logger:
            for i, w in enumerate(weights):
                fit = solve(eq, w, base.theta, opts)
                logger.update(
                    index=i,
                    grad_norm=fit.grad_norm,
                    iterations=fit.iterations,
                    converged=fit.converged,
                )
    """

    def __init__(
        self,
        total: int,
        progress_bar: bool = True,
        table_log_freq: int = 0,
        desc: str = "Refitting",
    ) -> None:
        """
        Initialize the refit logger.

        Args:
            total: Number of refits in the batch.
            progress_bar: Whether to show TQDM progress bar.
            table_log_freq: Log diagnostics table every N refits (0=disabled).
            desc: Progress bar label.
        """
        self.total = total
        self.progress_bar_enabled = progress_bar
        self.table_log_freq = table_log_freq
        self.console = Console()

        self.max_iterations: int = 0
        self.max_grad_norm: float = 0.0
        self.failures: int = 0
        self._pbar: tqdm | None = None

        if self.progress_bar_enabled:
            self._pbar = tqdm(
                total=total,
                desc=desc,
                unit="fit",
            )

    def update(
        self,
        index: int,
        grad_norm: float,
        iterations: int,
        converged: bool,
    ) -> None:
        """
        Update progress bar and optionally log diagnostics table.

        Args:
            index: Position of the refit in the batch (0-indexed).
            grad_norm: Achieved gradient norm of the refit.
            iterations: Newton iterations used.
            converged: Whether the refit met its tolerance.
        """
        self.max_iterations = max(self.max_iterations, iterations)
        if not math.isnan(grad_norm):
            self.max_grad_norm = max(self.max_grad_norm, grad_norm)
        if not converged:
            self.failures += 1

        if self._pbar is not None:
            self._pbar.set_postfix_str(
                f"max_iter={self.max_iterations:>3} | "
                f"max_grad={self.max_grad_norm:>9.2e} | "
                f"failed={self.failures:>4}"
            )
            self._pbar.update(1)

        if self.table_log_freq > 0 and (index + 1) % self.table_log_freq == 0:
            self._log_table(index=index)

    def _log_table(self, index: int) -> None:
        """
        Print a Rich table with the running solver diagnostics.

        Args:
            index: Position of the most recent refit.
        """
        table = Table(title=f"Refit Diagnostics - {index + 1}/{self.total}")
        table.add_column("Metric", style="cyan")
        table.add_column("Value", style="green")

        table.add_row("Refits", str(index + 1))
        table.add_row("Max Iterations", str(self.max_iterations))
        table.add_row("Max Grad Norm", f"{self.max_grad_norm:.3e}")
        table.add_row("Not Converged", str(self.failures))

        self.console.print(table)

    def close(self) -> None:
        """Clean up resources (close progress bar)."""
        if self._pbar is not None:
            self._pbar.close()
            self._pbar = None

    def __enter__(self) -> RefitLogger:
        return self

    def __exit__(
        self,
        exc_type: type[BaseException] | None,
        exc_val: BaseException | None,
        exc_tb: TracebackType | None,
    ) -> None:
        self.close()
