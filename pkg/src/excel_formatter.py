"""
Excel formatter for sweep and loss-map tables
"""
import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter

from src.config import NA_SENTINEL, OUTPUT_DIR

COLUMN_LABELS = {
    "family": "Family",
    "n": "n",
    "p": "p",
    "C": "Capacity",
    "b": "b",
    "d": "d",
    "d_prime": "d'",
    "C_r": "C_r",
    "q": "q (deepest first)",
    "value": "Value",
    "stderr": "Std Err",
    "iterations": "Iterations",
    "converged": "Converged",
    "b_star": "b*",
    "v_opt": "V_opt",
    "heuristic_b": "Heuristic b",
    "loss_percent": "Loss %",
    "allocation": "Allocation",
    "runs": "Runs",
    "seed": "Seed",
    "error": "Error",
}

# highlighted rather than shown as a column
FLAG_COLUMNS = ("is_optimal",)


def _is_highlighted(table_row):
    flag = table_row.get("is_optimal", False)
    if not pd.isna(flag) and bool(flag):
        return True
    # loss-map rows: the heuristic is the optimum itself
    heuristic, b_star = table_row.get("heuristic_b", None), table_row.get("b_star", None)
    if heuristic is None or b_star is None or pd.isna(heuristic) or pd.isna(b_star):
        return False
    return bool(heuristic == b_star)


def format_result_table_excel(table, title, output_file=None, notes=None):
    """Write a result table as a formatted workbook with optimal rows highlighted"""
    if output_file is None:
        OUTPUT_DIR.mkdir(parents=True, exist_ok=True)
        output_file = str(OUTPUT_DIR / f"{title.lower().replace(' ', '_')}.xlsx")
    else:
        output_file = str(output_file)

    wb = Workbook()
    ws = wb.active
    ws.title = title[:31]

    header_font = Font(bold=True, size=11, color="000000")
    header_fill = PatternFill(start_color="D3D3D3", end_color="D3D3D3", fill_type="solid")
    optimal_fill = PatternFill(start_color="808080", end_color="808080", fill_type="solid")
    optimal_font = Font(bold=True, color="FFFFFF")
    center_align = Alignment(horizontal="center", vertical="center")
    right_align = Alignment(horizontal="right", vertical="center")
    number_format = "0.000000"

    thin_border = Border(
        left=Side(style="thin"),
        right=Side(style="thin"),
        top=Side(style="thin"),
        bottom=Side(style="thin"),
    )

    columns = [c for c in table.columns if c not in FLAG_COLUMNS]
    last_col = get_column_letter(max(1, len(columns)))

    row = 1
    ws.merge_cells(f"A{row}:{last_col}{row}")
    ws[f"A{row}"].value = title
    ws[f"A{row}"].font = Font(bold=True, size=14)
    ws[f"A{row}"].alignment = center_align
    row += 2

    for i, col_name in enumerate(columns, start=1):
        cell = ws[f"{get_column_letter(i)}{row}"]
        cell.value = COLUMN_LABELS.get(col_name, col_name)
        cell.font = header_font
        cell.fill = header_fill
        cell.alignment = center_align
        cell.border = thin_border
    row += 1

    for _, table_row in table.iterrows():
        highlight = _is_highlighted(table_row)
        for i, col_name in enumerate(columns, start=1):
            cell = ws[f"{get_column_letter(i)}{row}"]
            val = table_row[col_name]
            if isinstance(val, str):
                cell.value = val
                cell.alignment = center_align
            elif pd.isna(val):
                cell.value = NA_SENTINEL
                cell.alignment = center_align
            else:
                cell.value = val.item() if hasattr(val, "item") else val
                if isinstance(cell.value, float):
                    cell.number_format = number_format
                cell.alignment = right_align
            cell.border = thin_border
            if highlight:
                cell.fill = optimal_fill
                cell.font = optimal_font
        row += 1

    row += 1
    ws.merge_cells(f"A{row}:{last_col}{row}")
    ws[f"A{row}"].value = notes or "Shaded rows: optimal branching factor of each group"
    ws[f"A{row}"].font = Font(size=9, italic=True)
    ws[f"A{row}"].alignment = Alignment(horizontal="left")

    for i, col_name in enumerate(columns, start=1):
        ws.column_dimensions[get_column_letter(i)].width = 28 if col_name in ("q", "error") else 12

    wb.save(output_file)
    return output_file
