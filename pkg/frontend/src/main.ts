// Bootstrap and event loop: one active task per tab, strict round-trips.
// Every submission is posted, acknowledged, and followed by a fresh task
// fetch; nothing is queued locally. A 409 means another tab answered first,
// so we just fetch the next task.

import { ApiError, SessionApi, Task } from "./api.js";
import {
  renderDone,
  renderElicit,
  renderLabelGrid,
  renderStatus,
} from "./render.js";
import { renderProgress } from "./progress.js";
import {
  ClientConfig,
  LabelGridState,
  SelectionState,
  assembleBits,
  configFromParams,
  cycleToggle,
  emptyGrid,
  emptySelection,
  screenFor,
  toggleCard,
} from "./viewmodel.js";

const POLL_MS = 4000;

class App {
  private api: SessionApi;
  private selection: SelectionState = emptySelection(2);
  private grid: LabelGridState = emptyGrid();
  private featureName = "";
  private busy = false;
  private error: string | null = null;
  private task: Task | null = null;

  constructor(
    private config: ClientConfig,
    private sessionId: string,
    private taskRoot: HTMLElement,
    private progressRoot: HTMLElement,
  ) {
    this.api = new SessionApi(config.baseUrl, config.token);
  }

  async start(): Promise<void> {
    await this.refreshTask();
    await this.refreshProgress();
    window.setInterval(() => void this.refreshProgress(), POLL_MS);
  }

  private async refreshTask(): Promise<void> {
    renderStatus(this.taskRoot, "fetching task…");
    try {
      const task = await this.api.nextTask(this.sessionId);
      const previousId = this.task && "task_id" in this.task ? this.task.task_id : null;
      if (!this.task || !("task_id" in task) || task.task_id !== previousId) {
        // a genuinely new task resets local input state
        this.selection = emptySelection(task.kind === "elicit_pair" ? 1 : 2);
        this.grid = emptyGrid();
        this.featureName = "";
        this.error = null;
      }
      this.task = task;
      this.render();
    } catch (e) {
      renderStatus(this.taskRoot, `cannot reach session: ${String(e)}`);
    }
  }

  private render(): void {
    if (!this.task) return;
    const screen = screenFor(this.task);
    if (screen.kind === "done") {
      renderDone(this.taskRoot, screen.reason, this.api.exportUrl(this.sessionId));
      return;
    }
    if (screen.kind === "elicit") {
      renderElicit(
        this.taskRoot,
        screen,
        this.selection,
        this.featureName,
        this.busy,
        this.error,
        {
          onToggle: (id) => {
            this.selection = toggleCard(this.selection, id);
            this.render();
          },
          onSubmit: (name) => void this.submitElicitation(screen.taskId, name),
          onNone: () => void this.submitNone(screen.taskId),
        },
      );
      return;
    }
    renderLabelGrid(this.taskRoot, screen, this.grid, this.busy, this.error, {
      onToggle: (id) => {
        this.grid = cycleToggle(this.grid, id);
        this.render();
      },
      onSubmit: () => void this.submitLabels(screen),
    });
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    this.busy = true;
    this.error = null;
    this.render();
    try {
      await action();
      await this.refreshTask();
      await this.refreshProgress();
    } catch (e) {
      if (e instanceof ApiError && e.taskTaken) {
        renderStatus(this.taskRoot, "task taken, fetching next…");
        await this.refreshTask();
      } else if (e instanceof ApiError && e.status === 400) {
        this.error = e.detail; // validation problem: shown inline, inputs stay
        this.render();
      } else {
        this.error = String(e);
        this.render();
      }
    } finally {
      this.busy = false;
    }
  }

  private submitElicitation(taskId: string, name: string): Promise<void> {
    this.featureName = name;
    return this.guarded(async () => {
      await this.api.submitElicitation(this.sessionId, taskId, name, this.selection.chosen);
    });
  }

  private submitNone(taskId: string): Promise<void> {
    if (this.config.confirmNone && !window.confirm("Really no shared feature here?")) {
      return Promise.resolve();
    }
    return this.guarded(async () => {
      await this.api.submitElicitation(this.sessionId, taskId, null, null);
    });
  }

  private submitLabels(screen: { taskId: string; items: { id: string }[] }): Promise<void> {
    const { bits, missing } = assembleBits(
      screen.items.map((i) => i.id),
      this.grid,
    );
    if (missing > 0 && !window.confirm(`${missing} unmarked item(s) will count as "doesn't have it". Submit?`)) {
      return Promise.resolve();
    }
    return this.guarded(async () => {
      await this.api.submitLabels(this.sessionId, screen.taskId, this.config.voter, bits);
    });
  }

  private async refreshProgress(): Promise<void> {
    try {
      renderProgress(this.progressRoot, await this.api.metrics(this.sessionId));
    } catch {
      // progress is advisory; keep the stale panel on transient failures
    }
  }
}

export async function boot(): Promise<void> {
  const config = configFromParams(new URLSearchParams(window.location.search));
  const taskRoot = document.getElementById("task")!;
  const progressRoot = document.getElementById("progress")!;
  if (!config.baseUrl || !config.sessionId) {
    renderStatus(
      taskRoot,
      "missing configuration: open as ?base=http://host:port&session=<id>[&token=...&voter=...]",
    );
    return;
  }
  const app = new App(config, config.sessionId, taskRoot, progressRoot);
  await app.start();
}

if (typeof document !== "undefined" && document.getElementById("task")) {
  void boot();
}
