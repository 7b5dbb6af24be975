"""
Unit tests for RefitLogger.
"""

from unittest.mock import MagicMock, patch

from ijkit.utils.refit_logger import RefitLogger


class TestRefitLoggerInit:
    """Tests for RefitLogger initialization."""

    def test_init_with_progress_bar_enabled(self) -> None:
        """Progress bar should be created when enabled."""
        with patch("ijkit.utils.refit_logger.tqdm") as mock_tqdm:
            mock_tqdm.return_value = MagicMock()

            logger = RefitLogger(total=40, progress_bar=True)

            assert logger.progress_bar_enabled is True
            assert logger.total == 40
            mock_tqdm.assert_called_once_with(
                total=40,
                desc="Refitting",
                unit="fit",
            )
            logger.close()

    def test_init_with_progress_bar_disabled(self) -> None:
        """Progress bar should not be created when disabled."""
        with patch("ijkit.utils.refit_logger.tqdm") as mock_tqdm:
            logger = RefitLogger(total=40, progress_bar=False)

            assert logger._pbar is None
            mock_tqdm.assert_not_called()
            logger.close()


class TestRefitLoggerUpdate:
    """Tests for RefitLogger.update."""

    def test_update_sets_postfix(self) -> None:
        with patch("ijkit.utils.refit_logger.tqdm") as mock_tqdm:
            mock_pbar = MagicMock()
            mock_tqdm.return_value = mock_pbar

            logger = RefitLogger(total=3, progress_bar=True)
            logger.update(index=0, grad_norm=1e-12, iterations=4, converged=True)

            postfix = mock_pbar.set_postfix_str.call_args[0][0]
            assert "max_iter=" in postfix
            assert "max_grad=" in postfix
            assert "failed=" in postfix
            mock_pbar.update.assert_called_once_with(1)
            logger.close()

    def test_tracks_worst_refit(self) -> None:
        logger = RefitLogger(total=3, progress_bar=False)

        logger.update(index=0, grad_norm=1e-12, iterations=3, converged=True)
        logger.update(index=1, grad_norm=1e-3, iterations=100, converged=False)
        logger.update(index=2, grad_norm=1e-11, iterations=5, converged=True)

        assert logger.max_iterations == 100
        assert logger.max_grad_norm == 1e-3
        assert logger.failures == 1
        logger.close()

    def test_nan_grad_norm_ignored(self) -> None:
        """A failed refit reports NaN; the running maximum stays finite."""
        logger = RefitLogger(total=2, progress_bar=False)

        logger.update(index=0, grad_norm=1e-9, iterations=2, converged=True)
        logger.update(index=1, grad_norm=float("nan"), iterations=0, converged=False)

        assert logger.max_grad_norm == 1e-9
        assert logger.failures == 1
        logger.close()


class TestRefitLoggerTableLogging:
    """Tests for the periodic diagnostics table."""

    def test_table_logging_at_interval(self) -> None:
        logger = RefitLogger(total=20, progress_bar=False, table_log_freq=5)

        with patch.object(logger, "_log_table") as mock_log_table:
            for i in range(20):
                logger.update(index=i, grad_norm=0.0, iterations=1, converged=True)

            assert mock_log_table.call_count == 4
            indices = [call[1]["index"] for call in mock_log_table.call_args_list]
            assert indices == [4, 9, 14, 19]

        logger.close()

    def test_table_logging_disabled_when_freq_zero(self) -> None:
        logger = RefitLogger(total=20, progress_bar=False, table_log_freq=0)

        with patch.object(logger, "_log_table") as mock_log_table:
            for i in range(20):
                logger.update(index=i, grad_norm=0.0, iterations=1, converged=True)

            mock_log_table.assert_not_called()

        logger.close()


class TestRefitLoggerContextManager:
    """Tests for RefitLogger as a context manager."""

    def test_context_manager_closes_properly(self) -> None:
        with patch("ijkit.utils.refit_logger.tqdm") as mock_tqdm:
            mock_pbar = MagicMock()
            mock_tqdm.return_value = mock_pbar

            with RefitLogger(total=10, progress_bar=True) as logger:
                assert logger._pbar is not None

            mock_pbar.close.assert_called_once()
            assert logger._pbar is None
