"""Helper scripts that consume chunksim reports."""
