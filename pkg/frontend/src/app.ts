/**
 * Application shell: content warning, session start, search loop, rule
 * panel, and the finish flow.
 *
 * All truth lives server-side; the UI holds only the session id and the
 * current view (query, filter, page), so a reload can rebuild state
 * from GET /api/rules.
 */

import {
  ApiClient,
  ApiError,
  CommentCard,
  ConditionName,
  FilterName,
  FinishResponse,
  SessionInfo,
} from "./api.js";
import { renderCommentCard, showsChips } from "./cards.js";
import { RulePanel } from "./rules.js";

export interface AppOptions {
  condition: ConditionName;
  corpus?: string;
  minRules?: number;
  randomSeed?: () => number;
}

const INSTRUCTIONS =
  "Search for a keyword and review the matching comments to judge " +
  "whether the keyword makes a good reporting rule. Add at least the " +
  "required number of rules, then finish to see your results.";

const CONTENT_WARNING =
  "Heads up: this task shows real comments that include profanity and " +
  "hate speech. Continue only if you are comfortable reading toxic content.";

export class App {
  readonly client: ApiClient;
  private root: HTMLElement;
  private doc: Document;
  private info!: SessionInfo;
  private rulePanel!: RulePanel;

  private query = "";
  private filter: FilterName = "all";
  private page = 0;
  private total = 0;

  private searchInput!: HTMLInputElement;
  private resultsEl!: HTMLElement;
  private statusEl!: HTMLElement;
  private finishBtn!: HTMLButtonElement;
  private pagerEl!: HTMLElement;

  constructor(
    doc: Document,
    root: HTMLElement,
    client: ApiClient,
    private options: AppOptions,
  ) {
    this.doc = doc;
    this.root = root;
    this.client = client;
  }

  /** Show the one-time content warning; resolve once accepted. */
  renderWarning(onAccept: () => void): void {
    const screen = this.el("div", "warning-screen");
    const text = this.el("p", "warning-text");
    text.textContent = CONTENT_WARNING;
    const accept = this.el("button", "warning-accept") as HTMLButtonElement;
    accept.textContent = "I understand, continue";
    accept.addEventListener("click", () => {
      screen.remove();
      onAccept();
    });
    screen.append(text, accept);
    this.root.appendChild(screen);
  }

  async start(): Promise<SessionInfo> {
    this.info = await this.client.createSession(
      this.options.condition,
      this.options.corpus,
      this.options.minRules,
    );
    this.renderLayout();
    return this.info;
  }

  private el(tag: string, className: string): HTMLElement {
    const node = this.doc.createElement(tag);
    node.className = className;
    return node;
  }

  private renderLayout(): void {
    const condition = this.info.condition;
    const layout = this.el("div", "layout");

    // left column: instructions, chips, random, results
    const left = this.el("section", "column-left");
    const instructions = this.el("div", "instructions-box");
    const instructionsText = this.el("p", "instructions-text");
    instructionsText.textContent = INSTRUCTIONS;
    const tutorialBtn = this.el("button", "tutorial-button") as HTMLButtonElement;
    tutorialBtn.textContent = "Show tutorial";
    tutorialBtn.addEventListener("click", () => {
      void this.client.logGesture("start_tutorial");
    });
    const helpLink = this.el("button", "instructions-link") as HTMLButtonElement;
    helpLink.textContent = "How each widget works";
    helpLink.addEventListener("click", () => {
      void this.client.logGesture("view_instructions");
    });
    instructions.append(instructionsText, tutorialBtn, helpLink);
    left.appendChild(instructions);

    if (showsChips(condition) && this.info.global_explanations) {
      const chipBox = this.el("div", "global-chips");
      for (const entry of this.info.global_explanations) {
        const chip = this.el("button", "global-chip") as HTMLButtonElement;
        chip.textContent = entry.token;
        chip.title = `${entry.frequency} rationale occurrences`;
        chip.addEventListener("click", () => void this.chipSearch(entry.token));
        chipBox.appendChild(chip);
      }
      left.appendChild(chipBox);
    }

    const randomBtn = this.el("button", "load-random") as HTMLButtonElement;
    randomBtn.textContent = "Load random comments";
    randomBtn.addEventListener("click", () => void this.loadRandom());
    left.appendChild(randomBtn);

    this.statusEl = this.el("p", "result-status");
    this.resultsEl = this.el("div", "results");
    this.pagerEl = this.el("div", "pager");
    left.append(this.statusEl, this.resultsEl, this.pagerEl);

    // right column: search controls, filter, rules, finish
    const right = this.el("section", "column-right");
    const searchRow = this.el("div", "search-row");
    this.searchInput = this.el("input", "search-input") as HTMLInputElement;
    this.searchInput.placeholder = "keyword";
    const searchBtn = this.el("button", "search-button") as HTMLButtonElement;
    searchBtn.textContent = "Search";
    searchBtn.addEventListener("click", () => void this.runSearch());
    const clearBtn = this.el("button", "clear-button") as HTMLButtonElement;
    clearBtn.textContent = "Clear";
    clearBtn.addEventListener("click", () => void this.clearSearch());
    searchRow.append(this.searchInput, searchBtn, clearBtn);
    right.appendChild(searchRow);

    if (condition !== "manual") {
      const filterRow = this.el("div", "filter-row");
      for (const value of ["all", "toxic", "nontoxic"] as FilterName[]) {
        const btn = this.el("button", `filter-button filter-${value}`) as HTMLButtonElement;
        btn.textContent = value;
        btn.addEventListener("click", () => void this.applyFilter(value));
        filterRow.appendChild(btn);
      }
      right.appendChild(filterRow);
    }

    const addRow = this.el("div", "add-row");
    const addBtn = this.el("button", "add-rule") as HTMLButtonElement;
    addBtn.textContent = "Add rule";
    addBtn.addEventListener("click", () => void this.addCurrentKeyword());
    addRow.appendChild(addBtn);
    right.appendChild(addRow);

    const panelBox = this.el("div", "rule-panel");
    this.rulePanel = new RulePanel(this.doc, this.client, panelBox);
    right.appendChild(panelBox);

    this.finishBtn = this.el("button", "finish-button") as HTMLButtonElement;
    this.finishBtn.textContent = "Finish making rules and go to survey";
    this.finishBtn.disabled = true;
    this.finishBtn.addEventListener("click", () => void this.finish());
    this.rulePanel.onCountChange = (count) => {
      this.finishBtn.disabled = count < this.info.min_rules;
    };
    right.appendChild(this.finishBtn);

    layout.append(left, right);
    this.root.appendChild(layout);
  }

  private renderCards(items: CommentCard[]): void {
    this.resultsEl.replaceChildren();
    for (const item of items) {
      this.resultsEl.appendChild(
        renderCommentCard(this.doc, item, this.info.condition),
      );
    }
  }

  private renderPager(): void {
    this.pagerEl.replaceChildren();
    const pages = Math.ceil(this.total / this.info.page_size);
    if (pages <= 1 || !this.query) return;
    const next = this.el("button", "pager-next") as HTMLButtonElement;
    next.textContent = "Next page";
    next.disabled = this.page >= pages - 1;
    next.addEventListener("click", () => void this.goToPage(this.page + 1));
    const prev = this.el("button", "pager-prev") as HTMLButtonElement;
    prev.textContent = "Previous page";
    prev.disabled = this.page <= 0;
    prev.addEventListener("click", () => void this.goToPage(this.page - 1));
    this.pagerEl.append(prev, next);
  }

  private async fetchPage(source?: "chip"): Promise<void> {
    try {
      const result = await this.client.search(
        this.query,
        this.filter,
        this.page,
        source,
      );
      this.total = result.total;
      this.statusEl.textContent = `${result.total} matching comments`;
      this.renderCards(result.items);
      this.renderPager();
    } catch (err) {
      if (err instanceof ApiError) {
        this.statusEl.textContent = err.message;
        return;
      }
      throw err;
    }
  }

  async runSearch(): Promise<void> {
    this.query = this.searchInput.value;
    this.page = 0;
    this.filter = "all";
    await this.fetchPage();
  }

  async chipSearch(token: string): Promise<void> {
    this.searchInput.value = token;
    this.query = token;
    this.page = 0;
    this.filter = "all";
    await this.fetchPage("chip");
  }

  async applyFilter(filter: FilterName): Promise<void> {
    if (!this.query) return;
    this.filter = filter;
    this.page = 0;
    await this.fetchPage();
  }

  async goToPage(page: number): Promise<void> {
    this.page = page;
    await this.fetchPage();
  }

  async clearSearch(): Promise<void> {
    this.searchInput.value = "";
    this.query = "";
    this.total = 0;
    this.resultsEl.replaceChildren();
    this.pagerEl.replaceChildren();
    this.statusEl.textContent = "";
    await this.client.logGesture("clear_search");
  }

  async loadRandom(): Promise<void> {
    const seed = this.options.randomSeed?.();
    const result = await this.client.loadRandom(this.info.page_size, seed);
    this.query = "";
    this.total = result.total;
    this.statusEl.textContent = `${result.total} random comments`;
    this.renderCards(result.items);
    this.pagerEl.replaceChildren();
  }

  async addCurrentKeyword(): Promise<boolean> {
    return this.rulePanel.add(this.searchInput.value);
  }

  async finish(): Promise<FinishResponse | null> {
    let response: FinishResponse;
    try {
      response = await this.client.finish();
    } catch (err) {
      if (err instanceof ApiError) {
        this.statusEl.textContent = err.message;  // e.g. the min-rules message
        return null;
      }
      throw err;
    }
    this.renderResultScreen(response);
    return response;
  }

  private renderResultScreen(response: FinishResponse): void {
    this.root.replaceChildren();
    const screen = this.el("div", "result-screen");
    const heading = this.el("h2", "result-heading");
    heading.textContent = "Rules submitted";
    screen.appendChild(heading);

    const result = response.result;
    const dl = this.el("dl", "result-stats");
    const rows: [string, string][] = [
      ["Rules", String(result.n_rules)],
      ["Actions", String(result.n_actions)],
      ["Elapsed minutes", result.elapsed_minutes.toFixed(2)],
      [
        "Rules per minute",
        result.rules_per_minute === null ? "n/a" : result.rules_per_minute.toFixed(2),
      ],
    ];
    if (response.report) {
      const fmt = (v: number | null) => (v === null ? "n/a" : v.toFixed(3));
      rows.push(
        ["Average precision", fmt(response.report.average_precision)],
        ["Union precision", fmt(response.report.union_precision)],
        ["Coverage", String(response.report.coverage)],
        ["Reward", String(response.report.reward)],
        ["Bonus", `$${response.report.bonus_usd.toFixed(2)}`],
      );
    }
    for (const [label, value] of rows) {
      const dt = this.el("dt", "result-label");
      dt.textContent = label;
      const dd = this.el("dd", "result-value");
      dd.textContent = value;
      dl.append(dt, dd);
    }
    screen.appendChild(dl);
    this.root.appendChild(screen);
  }
}

export async function boot(
  doc: Document,
  root: HTMLElement,
  client: ApiClient,
  options: AppOptions,
): Promise<App> {
  const app = new App(doc, root, client, options);
  await new Promise<void>((resolve) => app.renderWarning(resolve));
  await app.start();
  return app;
}
