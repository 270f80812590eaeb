"""Score a detector's output against ground truth.

Takes the bundled 10-image fixture (ground-truth boxes + predictions),
runs the full evaluation, and walks through what each number means:
box matching at IoU > 0.5, detection accuracy with its 95% interval,
the ROC over image-level abnormality scores, and the sensitivity at a
clinically motivated 1.5% false-positive rate.

Run:  python3 demos/demo_evaluation.py
"""

from pathlib import Path

from radprep import evaluate
from radprep.detect_eval import write_report_json, write_roc_csv

DATA = Path(__file__).parent.parent / "tests" / "data"
OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

report = evaluate(
    DATA / "golden_gt.json", DATA / "golden_pred.json", target_fpr=0.015
)

acc = report.accuracy
print("--- bounding-box placement (IoU > 0.5, class-agnostic) ---")
print(f"accuracy: {100 * acc.fraction:.2f}% ({acc.matched}/{acc.total})  "
      f"95% CI [{100 * acc.ci[0]:.1f}, {100 * acc.ci[1]:.1f}]")
print(f"IoU of matched boxes: {report.iou_mean:.2f} +/- {report.iou_std:.2f}")

print("\n--- normal vs abnormal classification ---")
print(f"AUC: {report.auc:.3f}")
print(f"sensitivity at <= {100 * report.target_fpr:.1f}% FPR: "
      f"{100 * report.tpr:.1f}% (achieved FPR {100 * report.achieved_fpr:.1f}%)")

print("\nROC sweep (score threshold -> operating point):")
print(f"{'threshold':>10} {'FPR':>6} {'TPR':>6}")
for point in report.roc_points:
    threshold = "inf" if point.threshold == float("inf") else f"{point.threshold:.2f}"
    print(f"{threshold:>10} {point.fpr:>6.2f} {point.tpr:>6.2f}")

write_report_json(report, OUT / "report.json")
write_roc_csv(report.roc_points, OUT / "roc.csv")
print(f"\nreport.json and roc.csv written to {OUT}/")
