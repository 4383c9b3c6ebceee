from rich.table import Table


def create_column_grid(num_columns: int) -> Table:
    """
    Create a grid of equal-width columns for side-by-side panels.

    Parameters
    ----------
        num_columns: Number of columns in the grid

    Returns
    -------
        Table: Grid with equal-ratio columns
    """
    grid = Table.grid(padding=(0, 1), expand=True)
    for _ in range(num_columns):
        grid.add_column(ratio=1, min_width=24)
    return grid


def results_table(title: str, columns: list[str]) -> Table:
    """
    Create a table with right-aligned numeric columns after the first.

    Parameters
    ----------
        title: Table title
        columns: Column headers

    Returns
    -------
        Table: Empty table ready for rows
    """
    table = Table(title=title, title_style="bold", header_style="cyan")
    for i, name in enumerate(columns):
        table.add_column(name, justify="left" if i == 0 else "right")
    return table
