/** Page bootstrap: service picker, session launcher, dashboard mount. */

import { ApiClient } from './api.js';
import { Dashboard } from './dashboard.js';

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found as T;
}

async function refreshLauncher(client: ApiClient): Promise<void> {
  const taskSelect = el<HTMLSelectElement>('task-select');
  const sessionSelect = el<HTMLSelectElement>('session-select');
  const tasks = await client.tasks();
  taskSelect.innerHTML = '';
  for (const task of tasks) {
    const opt = document.createElement('option');
    opt.value = task.id;
    opt.textContent = `${task.id} (${task.profile}, ${task.initializer})`;
    taskSelect.appendChild(opt);
  }
  const listing = await fetch(client.base + '/v1/sessions').then((r) => r.json());
  sessionSelect.innerHTML = '<option value="">attach to session</option>';
  for (const row of listing.sessions ?? []) {
    const opt = document.createElement('option');
    opt.value = row.session;
    opt.textContent = `${row.session} · ${row.status} · tick ${row.tick}`;
    sessionSelect.appendChild(opt);
  }
}

function boot(): void {
  const params = new URLSearchParams(window.location.search);
  const baseInput = el<HTMLInputElement>('base-url');
  baseInput.value =
    params.get('base') ?? localStorage.getItem('console-base') ?? 'http://127.0.0.1:8030';

  let client = new ApiClient(baseInput.value);
  let dashboard = new Dashboard(client, el('app'));

  const rewire = () => {
    localStorage.setItem('console-base', baseInput.value);
    dashboard.disconnect();
    client = new ApiClient(baseInput.value);
    dashboard = new Dashboard(client, el('app'));
    refreshLauncher(client).catch((err) => console.error('launcher refresh failed', err));
  };
  baseInput.addEventListener('change', rewire);

  el('launch-form').addEventListener('submit', (ev) => {
    ev.preventDefault();
    const body = {
      task: el<HTMLSelectElement>('task-select').value,
      seed: Number(el<HTMLInputElement>('seed-input').value) || 0,
      policy: el<HTMLSelectElement>('policy-select').value as 'scripted' | 'learned',
      start_paused: el<HTMLInputElement>('paused-check').checked,
      step_delay: Number(el<HTMLInputElement>('delay-input').value) || 0,
    };
    client
      .createSession(body)
      .then((state) => dashboard.connect(state.session))
      .then(() => refreshLauncher(client))
      .catch((err) => console.error('session create failed', err));
  });

  el('session-select').addEventListener('change', (ev) => {
    const sid = (ev.target as HTMLSelectElement).value;
    if (sid) void dashboard.connect(sid);
  });

  refreshLauncher(client).catch((err) => console.error('launcher refresh failed', err));
  const attach = params.get('session');
  if (attach) void dashboard.connect(attach);
}

boot();
