import init, { gwoTrace, pcaSpectrum, runSelection } from './pkg/gwofs_web.js';

await init();

const COLORS = ['#1f77b4', '#d62728', '#2ca02c', '#9467bd', '#ff7f0e', '#8c564b'];
const PAD = 40;

function values(form) {
  const out = {};
  for (const el of form.elements) {
    if (el.name) out[el.name] = el.type === 'number' ? Number(el.value) : el.value;
  }
  return out;
}

function report(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.classList.toggle('err', isError);
}

function bind(sectionId, outId, run) {
  const form = document.querySelector(`#${sectionId} form`);
  form.addEventListener('submit', (e) => {
    e.preventDefault();
    try {
      run(values(form));
    } catch (err) {
      report(outId, String(err.message ?? err), true);
    }
  });
  form.requestSubmit();
}

/// Axes with linear x in [x0, x1] and y in [y0, y1]; returns the mapping.
function axes(ctx, x0, x1, y0, y1, xlabel, ylabel) {
  const { width: w, height: h } = ctx.canvas;
  ctx.clearRect(0, 0, w, h);
  ctx.strokeStyle = '#888';
  ctx.fillStyle = '#444';
  ctx.font = '11px system-ui';
  ctx.beginPath();
  ctx.moveTo(PAD, PAD / 2);
  ctx.lineTo(PAD, h - PAD);
  ctx.lineTo(w - PAD / 2, h - PAD);
  ctx.stroke();
  const sx = (x) => PAD + ((x - x0) / (x1 - x0 || 1)) * (w - 1.5 * PAD);
  const sy = (y) => h - PAD - ((y - y0) / (y1 - y0 || 1)) * (h - 1.5 * PAD);
  ctx.textAlign = 'center';
  ctx.fillText(xlabel, w / 2, h - 8);
  for (const t of [x0, (x0 + x1) / 2, x1]) ctx.fillText(+t.toPrecision(3), sx(t), h - PAD + 14);
  ctx.save();
  ctx.translate(12, h / 2);
  ctx.rotate(-Math.PI / 2);
  ctx.fillText(ylabel, 0, 0);
  ctx.restore();
  ctx.textAlign = 'right';
  for (const t of [y0, (y0 + y1) / 2, y1]) ctx.fillText(+t.toPrecision(3), PAD - 4, sy(t) + 4);
  return { sx, sy };
}

function polyline(ctx, xs, ys, color, width = 1.5) {
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  xs.forEach((x, i) => (i ? ctx.lineTo(x, ys[i]) : ctx.moveTo(x, ys[i])));
  ctx.stroke();
  ctx.lineWidth = 1;
}

// GWO swarm

let animation = null;

function heatmap(trace) {
  const n = trace.grid_size;
  const img = new ImageData(n, n);
  const logs = trace.grid.map((v) => Math.log1p(v));
  const lo = Math.min(...logs);
  const hi = Math.max(...logs);
  logs.forEach((v, i) => {
    const t = (v - lo) / (hi - lo || 1);
    img.data[4 * i] = 255 - 120 * t;
    img.data[4 * i + 1] = 250 - 170 * t;
    img.data[4 * i + 2] = 220 - 40 * t;
    img.data[4 * i + 3] = 255;
  });
  const off = document.createElement('canvas');
  off.width = off.height = n;
  off.getContext('2d').putImageData(img, 0, 0);
  return off;
}

function drawSwarm(trace, background, k) {
  const ctx = document.getElementById('swarm').getContext('2d');
  const { width: w, height: h } = ctx.canvas;
  const [lo, hi] = trace.bounds;
  ctx.imageSmoothingEnabled = true;
  ctx.drawImage(background, 0, 0, w, h);
  const px = (v) => ((v - lo) / (hi - lo)) * w;
  const frame = trace.frames[k];
  ctx.fillStyle = '#1d232b';
  for (const [x, y] of frame.positions) {
    ctx.beginPath();
    ctx.arc(px(x), px(y), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
  ctx.strokeStyle = '#d62728';
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.arc(px(frame.alpha[0]), px(frame.alpha[1]), 7, 0, 2 * Math.PI);
  ctx.stroke();
  ctx.lineWidth = 1;
  ctx.fillStyle = '#1d232b';
  ctx.font = '12px system-ui';
  ctx.fillText(`iteration ${k}  a = ${frame.a.toFixed(3)}`, 8, 16);
}

function drawConvergence(trace) {
  const ctx = document.getElementById('convergence').getContext('2d');
  const ys = trace.frames.map((f) => Math.log10(Math.max(f.alpha_fitness, 1e-300)));
  const lo = Math.max(Math.min(...ys), -30);
  const hi = Math.max(...ys);
  const { sx, sy } = axes(ctx, 0, trace.frames.length - 1, lo, hi, 'iteration', 'log10 alpha fitness');
  polyline(ctx, ys.map((_, i) => sx(i)), ys.map((y) => sy(Math.max(y, lo))), COLORS[0], 2);
}

bind('gwo', 'gwo-out', (v) => {
  const trace = JSON.parse(gwoTrace(v.function, v.agents, v.iters, v.seed));
  const background = heatmap(trace);
  drawConvergence(trace);
  if (animation) cancelAnimationFrame(animation);
  let k = 0;
  let last = 0;
  const tick = (time) => {
    if (time - last > 60) {
      drawSwarm(trace, background, k);
      last = time;
      k += 1;
    }
    if (k < trace.frames.length) animation = requestAnimationFrame(tick);
  };
  animation = requestAnimationFrame(tick);
  const best = trace.frames[trace.frames.length - 1];
  report('gwo-out', `${trace.function}: alpha ${best.alpha.map((x) => x.toFixed(5)).join(', ')}  fitness ${best.alpha_fitness.toExponential(3)}`);
});

// PCA spectrum

bind('pca', 'pca-out', (v) => {
  const s = JSON.parse(pcaSpectrum(v.samples, v.informative, v.noise, v.sep, v.threshold, v.seed));
  const ctx = document.getElementById('spectrum').getContext('2d');
  const n = s.eigenvalues.length;
  const top = Math.max(...s.eigenvalues);
  const { sx, sy } = axes(ctx, 0, n, 0, top, 'component', 'eigenvalue');
  const bar = (sx(1) - sx(0)) * 0.8;
  s.eigenvalues.forEach((l, i) => {
    ctx.fillStyle = i < s.m ? COLORS[0] : '#c5ccd6';
    ctx.fillRect(sx(i) + bar * 0.1, sy(l), bar, sy(0) - sy(l));
  });
  const cevY = (c) => sy(c * top);
  polyline(ctx, s.cev.map((_, i) => sx(i + 1)), s.cev.map(cevY), COLORS[1], 2);
  ctx.setLineDash([4, 4]);
  polyline(ctx, [sx(0), sx(n)], [cevY(s.threshold), cevY(s.threshold)], COLORS[1]);
  ctx.setLineDash([]);
  report('pca-out', `kept m = ${s.m} of ${s.n_dims} components (CEV ${s.cev[s.m - 1].toFixed(4)} >= ${s.threshold}); red curve is CEV scaled to the largest eigenvalue`);
});

// selection + ROC

bind('select', 'select-out', (v) => {
  const d = JSON.parse(runSelection(v.samples, v.noise, v.sep, v.agents, v.iters, v.seed));
  const roc = document.getElementById('roc').getContext('2d');
  const r = axes(roc, 0, 1, 0, 1, 'false positive rate', 'true positive rate');
  roc.setLineDash([3, 3]);
  polyline(roc, [r.sx(0), r.sx(1)], [r.sy(0), r.sy(1)], '#aaa');
  roc.setLineDash([]);
  d.roc.curves.forEach((c, k) => {
    polyline(roc, c.points.map((p) => r.sx(p.fpr)), c.points.map((p) => r.sy(p.tpr)), COLORS[k % COLORS.length], 2);
    roc.fillStyle = COLORS[k % COLORS.length];
    roc.textAlign = 'left';
    roc.fillText(`class ${k}: AUC ${c.auc.toFixed(3)}`, r.sx(0.55), r.sy(0.3 - 0.08 * k));
  });

  const hist = document.getElementById('selection-history').getContext('2d');
  const lo = Math.min(...d.history);
  const hi = Math.max(...d.history);
  const h = axes(hist, 1, d.history.length, lo, hi === lo ? lo + 0.01 : hi, 'iteration', 'alpha fitness');
  polyline(hist, d.history.map((_, i) => h.sx(i + 1)), d.history.map((y) => h.sy(y)), COLORS[0], 2);

  report(
    'select-out',
    [
      `${d.original_dim} features -> PCA keeps ${d.m} -> GWO selects ${d.selected.length}: [${d.selected.join(', ')}]`,
      `test accuracy ${d.test_accuracy.toFixed(4)} on the selected components, ${d.all_features_accuracy.toFixed(4)} on all ${d.m}`,
    ].join('\n'),
  );
});

