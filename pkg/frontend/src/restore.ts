import { ApiClient, ApiError } from './api';

export type RestorePhase = 'idle' | 'confirming' | 'working' | 'done' | 'error';

/**
 * Restore flow: arm with a commit, show a confirmation dialog, and only
 * on explicit confirm issue the POST. Cancel never touches the network.
 */
export class RestoreController {
  phase: RestorePhase = 'idle';
  commitId: string | null = null;
  error: string | null = null;
  result: Blob | null = null;

  constructor(
    private client: ApiClient,
    private workbook: string,
  ) {}

  request(commitId: string): void {
    this.commitId = commitId;
    this.phase = 'confirming';
    this.error = null;
    this.result = null;
  }

  cancel(): void {
    this.phase = 'idle';
    this.commitId = null;
  }

  async confirm(): Promise<void> {
    if (this.phase !== 'confirming' || !this.commitId) return;
    this.phase = 'working';
    try {
      this.result = await this.client.postRestore(this.workbook, this.commitId);
      this.phase = 'done';
    } catch (err) {
      this.phase = 'error';
      this.error = err instanceof ApiError ? err.message : 'network failure';
    }
  }
}

export function renderRestoreDialog(controller: RestoreController): string {
  switch (controller.phase) {
    case 'confirming':
      return (
        `<dialog open class="restore-confirm">` +
        `<p>Restore version ${controller.commitId?.slice(0, 8)}?</p>` +
        `<button data-action="confirm">Restore</button>` +
        `<button data-action="cancel">Cancel</button></dialog>`
      );
    case 'done':
      return `<div class="toast success">Restored ${controller.commitId?.slice(0, 8)}</div>`;
    case 'error':
      return `<dialog open class="restore-error">${controller.error}` +
        `<button data-action="dismiss">Close</button></dialog>`;
    default:
      return '';
  }
}
