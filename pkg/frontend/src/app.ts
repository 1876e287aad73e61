import { ApiClient } from './api';
import { renderDiff } from './diffview';
import { RestoreController, renderRestoreDialog } from './restore';
import { renderDrilldown } from './sparkline';
import { TimelineViewState, renderTimeline } from './timeline';

interface AppConfig {
  baseUrl: string;
  workbook: string;
  token?: string;
}

/** Browser entry point: wires the views into #timeline/#diff/#detail slots. */
export function mount(root: HTMLElement, config: AppConfig): void {
  const client = new ApiClient(config);
  const timeline = new TimelineViewState();
  const restore = new RestoreController(client, config.workbook);

  const slots = {
    timeline: root.querySelector<HTMLElement>('#timeline')!,
    diff: root.querySelector<HTMLElement>('#diff')!,
    detail: root.querySelector<HTMLElement>('#detail')!,
  };

  const draw = () => {
    slots.timeline.innerHTML = renderTimeline(timeline) + renderRestoreDialog(restore);
  };

  const showDiff = async (from: string, to: string) => {
    const changeset = await client.getDiff(config.workbook, from, to);
    slots.diff.innerHTML = renderDiff(changeset, null);
  };

  const showCell = async (sheet: string, a1: string) => {
    const series = await client.getHistory(config.workbook, sheet, a1);
    const alerts = await client.getAlerts(config.workbook);
    const firing = alerts.find((f) => f.sheet === sheet && f.address === a1);
    slots.detail.innerHTML = renderDrilldown(series, firing?.pattern ?? null);
  };

  slots.timeline.addEventListener('click', (event) => {
    const node = (event.target as HTMLElement).closest<HTMLElement>('[data-commit]');
    const action = (event.target as HTMLElement).dataset.action;
    if (action === 'confirm') void restore.confirm().then(draw);
    if (action === 'cancel') restore.cancel();
    if (node?.dataset.commit) {
      const pair = timeline.pick(node.dataset.commit);
      if (pair) void showDiff(pair.from, pair.to);
    }
    draw();
  });

  slots.diff.addEventListener('click', (event) => {
    const row = (event.target as HTMLElement).closest<HTMLElement>('tr.change');
    const where = row?.querySelector('td')?.textContent ?? '';
    const [sheet, a1] = where.split('!');
    if (sheet && a1) void showCell(sheet, a1);
  });

  void client.getCommits(config.workbook).then((commits) => {
    timeline.setCommits(commits);
    draw();
  }).catch((err) => {
    timeline.error = String(err);
    draw();
  });
}
