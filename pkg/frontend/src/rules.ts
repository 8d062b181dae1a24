/**
 * Rule panel: the list of added rules with their match counts, the add
 * flow with inline error display, and removal.
 */

import { ApiClient, ApiError, RuleRow } from "./api.js";

export class RulePanel {
  private listEl: HTMLUListElement;
  private errorEl: HTMLElement;
  private rows: RuleRow[] = [];

  onCountChange: (count: number) => void = () => {};

  constructor(
    private doc: Document,
    private client: ApiClient,
    container: HTMLElement,
  ) {
    this.errorEl = doc.createElement("p");
    this.errorEl.className = "rule-error";
    this.errorEl.hidden = true;
    this.listEl = doc.createElement("ul");
    this.listEl.className = "rule-list";
    container.appendChild(this.errorEl);
    container.appendChild(this.listEl);
  }

  get count(): number {
    return this.rows.length;
  }

  async add(keyword: string): Promise<boolean> {
    this.clearError();
    try {
      const { rule } = await this.client.addRule(keyword);
      this.rows.push(rule);
      this.renderRow(rule);
      this.onCountChange(this.rows.length);
      return true;
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(err.message);
        return false;
      }
      throw err;
    }
  }

  async remove(keyword: string): Promise<void> {
    this.clearError();
    try {
      await this.client.removeRule(keyword);
    } catch (err) {
      if (err instanceof ApiError) {
        this.showError(err.message);
        return;
      }
      throw err;
    }
    this.rows = this.rows.filter((r) => r.keyword !== keyword);
    const row = this.listEl.querySelector(`li[data-keyword="${keyword}"]`);
    row?.remove();
    this.onCountChange(this.rows.length);
  }

  private renderRow(rule: RuleRow): void {
    const item = this.doc.createElement("li");
    item.className = "rule-row";
    item.dataset.keyword = rule.keyword;

    const label = this.doc.createElement("span");
    label.className = "rule-keyword";
    label.textContent = rule.keyword;
    item.appendChild(label);

    const counts = this.doc.createElement("span");
    counts.className = "rule-counts";
    counts.textContent =
      rule.predicted_toxic_matched === undefined
        ? `${rule.total_matched} matched`
        : `${rule.total_matched} matched, ${rule.predicted_toxic_matched} predicted toxic`;
    item.appendChild(counts);

    const removeBtn = this.doc.createElement("button");
    removeBtn.className = "rule-remove";
    removeBtn.textContent = "remove";
    removeBtn.addEventListener("click", () => void this.remove(rule.keyword));
    item.appendChild(removeBtn);

    this.listEl.appendChild(item);
  }

  private showError(message: string): void {
    this.errorEl.textContent = message;
    this.errorEl.hidden = false;
  }

  private clearError(): void {
    this.errorEl.hidden = true;
    this.errorEl.textContent = "";
  }
}
